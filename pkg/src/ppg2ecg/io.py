"""Session directories and artifact files.

A session directory holds ``signals.csv`` (header ``index,ppg,ecg``, one
row per sample) and ``meta.json`` with ``fs`` and optionally ``age``,
``weight``, ``artifact_intervals``, ``ppg_peaks``, ``ecg_peaks`` and
``session_id``.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import _jsonio
from ._jsonio import format_float
from .errors import MissingMeta, ParseError, UnitMismatch
from .signal_model import CyclePairSet, Session, TimeSeries, validate_session

SIGNALS = "signals.csv"
META = "meta.json"
TRUTH = "truth.json"
HEADER = ["index", "ppg", "ecg"]


def _read_signals(path: Path):
    ppg, ecg = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != HEADER:
            raise ParseError(f"expected header {','.join(HEADER)}, got {header}", line=1)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 fields, got {len(row)}", line=line)
            try:
                idx = int(row[0])
            except ValueError:
                raise ParseError(f"field 'index' is not an integer: {row[0]!r}", line=line) from None
            if idx != len(ppg):
                raise ParseError(f"index {idx} out of sequence (expected {len(ppg)})", line=line)
            for name, value, dest in (("ppg", row[1], ppg), ("ecg", row[2], ecg)):
                try:
                    dest.append(float(value))
                except ValueError:
                    raise ParseError(f"field {name!r} is not numeric: {value!r}", line=line) from None
    return np.array(ppg), np.array(ecg)


def _read_meta(path: Path) -> dict:
    if not path.exists():
        raise MissingMeta(f"{path} not found")
    try:
        meta = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path.name}: {exc.msg}", line=exc.lineno) from None
    if not isinstance(meta, dict) or "fs" not in meta:
        raise MissingMeta(f"{path.name} lacks the sampling rate 'fs'")
    try:
        fs = float(meta["fs"])
    except (TypeError, ValueError):
        raise UnitMismatch(f"fs is not a number: {meta['fs']!r}") from None
    if not fs > 0:
        raise UnitMismatch(f"fs must be positive, got {fs}")
    return meta


def ingest(path) -> Session:
    """Read and validate one session directory."""
    path = Path(path)
    meta = _read_meta(path / META)
    signals = path / SIGNALS
    if not signals.exists():
        raise ParseError(f"{signals} not found")
    ppg, ecg = _read_signals(signals)
    fs = float(meta["fs"])
    s = Session(
        ppg=TimeSeries(ppg, fs),
        ecg=TimeSeries(ecg, fs),
        age=meta.get("age"),
        weight=meta.get("weight"),
        artifact_mask=meta.get("artifact_intervals") or (),
        ppg_peaks=meta.get("ppg_peaks"),
        ecg_peaks=meta.get("ecg_peaks"),
        session_id=str(meta.get("session_id", path.name)),
    )
    return validate_session(s)


def write_session(s: Session, path, truth=None) -> Path:
    """Write ``s`` as a session directory; floats keep full precision."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    with (path / SIGNALS).open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(HEADER) + "\n")
        for i, (p, e) in enumerate(zip(s.ppg.samples, s.ecg.samples)):
            fh.write(f"{i},{format_float(p)},{format_float(e)}\n")
    meta = {
        "session_id": s.session_id,
        "fs": s.fs,
        "age": s.age,
        "weight": s.weight,
        "artifact_intervals": [list(iv) for iv in s.artifact_mask],
    }
    if s.ppg_peaks is not None:
        meta["ppg_peaks"] = s.ppg_peaks.tolist()
    if s.ecg_peaks is not None:
        meta["ecg_peaks"] = s.ecg_peaks.tolist()
    _jsonio.dump(meta, path / META)
    if truth is not None:
        _jsonio.dump(
            {
                "r_peaks": truth.r_peaks.tolist(),
                "systolic_peaks": truth.systolic_peaks.tolist(),
                "onsets": truth.onsets.tolist(),
                "n_cycles": truth.n_cycles,
                "ppg_delay": truth.ppg_delay,
                "F_true": None if truth.F_true is None else truth.F_true.tolist(),
            },
            path / TRUTH,
        )
    return path


def write_matrix(arr, path, header=None):
    arr = np.atleast_2d(arr)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in arr:
            fh.write(",".join(str(v) if isinstance(v, (int, np.integer)) else format_float(v) for v in row))
            fh.write("\n")


def write_cycles(cps: CyclePairSet, path) -> Path:
    """Cycle matrices as CSV plus a JSON sidecar with alignment metadata."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    write_matrix(cps.c_x, path / "c_x.csv")
    write_matrix(cps.c_y, path / "c_y.csv")
    write_matrix(cps.boundaries, path / "boundaries.csv", header=["start", "end"])
    _jsonio.dump(
        {
            "scheme": cps.scheme,
            "L": cps.L,
            "n_cycles": cps.n_cycles,
            "cycle_delay": cps.cycle_delay,
            "sample_shift": cps.sample_shift,
            "n_degenerate": cps.n_degenerate,
        },
        path / "cycles.json",
    )
    return path


def write_vector(vec, path, name):
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(name + "\n")
        for v in np.ravel(vec):
            fh.write(format_float(v) + "\n")


def read_vector(path) -> np.ndarray:
    return np.loadtxt(path, skiprows=1, ndmin=1)
