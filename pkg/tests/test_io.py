import json

import numpy as np
import pytest

from ppg2ecg import _jsonio
from ppg2ecg.errors import MissingMeta, ParseError, UnitMismatch
from ppg2ecg.io import ingest, write_cycles, write_session
from ppg2ecg.preprocess import preprocess_session


def test_round_trip_is_lossless(short_session, tmp_path):
    s, truth = short_session
    write_session(s, tmp_path / "s", truth)
    back = ingest(tmp_path / "s")
    assert np.array_equal(back.ppg.samples, s.ppg.samples)
    assert np.array_equal(back.ecg.samples, s.ecg.samples)
    assert (back.fs, back.age, back.weight, back.session_id) == (s.fs, s.age, s.weight, s.session_id)
    t = json.loads((tmp_path / "s" / "truth.json").read_text())
    assert t["r_peaks"] == truth.r_peaks.tolist()


def write_dir(path, rows, meta):
    path.mkdir()
    (path / "signals.csv").write_text("index,ppg,ecg\n" + "".join(r + "\n" for r in rows))
    (path / "meta.json").write_text(json.dumps(meta))
    return path


def good_rows(n=20):
    return [f"{i},{np.sin(i)},{np.cos(i)}" for i in range(n)]


def test_non_numeric_field_line_reported(tmp_path):
    rows = good_rows()
    rows[8] = "8,abc,0.5"  # file line 10: header is line 1
    d = write_dir(tmp_path / "s", rows, {"fs": 100})
    with pytest.raises(ParseError) as exc:
        ingest(d)
    assert exc.value.line == 10


def test_missing_fs(tmp_path):
    with pytest.raises(MissingMeta):
        ingest(write_dir(tmp_path / "s", good_rows(), {"age": 3}))
    (tmp_path / "t").mkdir()
    with pytest.raises(MissingMeta):
        ingest(tmp_path / "t")


def test_nonpositive_fs(tmp_path):
    with pytest.raises(UnitMismatch):
        ingest(write_dir(tmp_path / "s", good_rows(), {"fs": -5}))


def test_bad_header_and_index(tmp_path):
    d = write_dir(tmp_path / "s", good_rows(), {"fs": 100})
    (d / "signals.csv").write_text("idx,ppg,ecg\n0,1,2\n")
    with pytest.raises(ParseError):
        ingest(d)
    (d / "signals.csv").write_text("index,ppg,ecg\n0,1,2\n2,1,2\n")
    with pytest.raises(ParseError) as exc:
        ingest(d)
    assert exc.value.line == 3


def test_meta_fields_loaded(tmp_path):
    meta = {"fs": 100, "age": 40, "weight": 70.5, "artifact_intervals": [[2, 5], [4, 8]],
            "ppg_peaks": [3, 9], "ecg_peaks": [1, 7], "session_id": "subj"}
    s = ingest(write_dir(tmp_path / "s", good_rows(), meta))
    assert s.artifact_mask == ((2, 8),)
    assert s.session_id == "subj" and s.ppg_peaks.tolist() == [3, 9]


def test_write_cycles(clean_session, tmp_path):
    cps = preprocess_session(clean_session[0])
    write_cycles(cps, tmp_path / "c")
    cx = np.loadtxt(tmp_path / "c" / "c_x.csv", delimiter=",")
    assert np.array_equal(cx, cps.c_x)
    meta = json.loads((tmp_path / "c" / "cycles.json").read_text())
    assert meta["sample_shift"] == -60 and meta["n_cycles"] == cps.n_cycles


def test_json_floats_have_17_digits():
    text = _jsonio.dumps({"a": 0.1, "b": [1.0, 2], "c": None, "d": "x", "e": np.float64(1 / 3)})
    assert "0.10000000000000001" in text and "0.33333333333333331" in text
    back = json.loads(text)
    assert back["a"] == 0.1 and back["b"] == [1.0, 2]
    with pytest.raises(ValueError):
        _jsonio.dumps({"x": float("nan")})
