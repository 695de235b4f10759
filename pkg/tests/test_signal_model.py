import numpy as np
import pytest
from hypothesis import given, strategies as st

from ppg2ecg.errors import (
    LengthMismatchBeyondTolerance,
    NonFiniteSample,
    NonMonotonePeaks,
    SamplingRateMismatch,
    UnitMismatch,
)
from ppg2ecg.signal_model import (
    CoefficientSet,
    CyclePairSet,
    PeakTrain,
    Session,
    TimeSeries,
    TransformModel,
    merge_intervals,
    validate_session,
)


def make_session(n_ppg=1000, n_ecg=1000, fs=100.0, **kw):
    t = np.arange(max(n_ppg, n_ecg))
    return Session(
        ppg=TimeSeries(np.sin(t[:n_ppg] / 10), fs),
        ecg=TimeSeries(np.cos(t[:n_ecg] / 10), fs),
        **kw,
    )


def test_overlapping_masks_are_merged():
    s = validate_session(make_session(artifact_mask=[(100, 200), (150, 300)]))
    assert s.artifact_mask == ((100, 300),)


def test_equal_lengths_unchanged():
    s = validate_session(make_session(144000, 144000, fs=300.0))
    assert len(s.ppg) == len(s.ecg) == 144000


def test_nan_position_reported():
    s = make_session()
    x = s.ppg.samples.copy()
    x[42] = np.nan
    bad = Session(TimeSeries(x, s.fs), s.ecg)
    with pytest.raises(NonFiniteSample) as exc:
        validate_session(bad)
    assert exc.value.position == 42


def test_small_length_mismatch_truncates():
    s = validate_session(make_session(1000, 995))
    assert len(s.ppg) == len(s.ecg) == 995


def test_large_length_mismatch_rejected():
    with pytest.raises(LengthMismatchBeyondTolerance):
        validate_session(make_session(1000, 950))


def test_sampling_rate_mismatch():
    s = make_session()
    with pytest.raises(SamplingRateMismatch):
        validate_session(Session(s.ppg, TimeSeries(s.ecg.samples, 200.0)))


def test_nonpositive_fs():
    with pytest.raises(UnitMismatch):
        TimeSeries([1.0, 2.0], 0.0)


def test_non_monotone_annotations():
    with pytest.raises(NonMonotonePeaks):
        validate_session(make_session(ecg_peaks=[10, 30, 20]))
    with pytest.raises(NonMonotonePeaks):
        PeakTrain([5, 5, 6])


def test_annotations_outside_record_dropped():
    s = validate_session(make_session(ppg_peaks=[-3, 10, 500, 2000]))
    assert s.ppg_peaks.tolist() == [10, 500]


def test_mask_clipped_to_record():
    s = validate_session(make_session(artifact_mask=[(-50, 10), (990, 1200)]))
    assert s.artifact_mask == ((0, 10), (990, 1000))


def test_validate_is_idempotent():
    s = make_session(1000, 996, artifact_mask=[(5, 9), (7, 20), (400, 410)], ecg_peaks=[3, 50, 998])
    once = validate_session(s)
    twice = validate_session(once)
    assert np.array_equal(once.ppg.samples, twice.ppg.samples)
    assert np.array_equal(once.ecg.samples, twice.ecg.samples)
    assert once.artifact_mask == twice.artifact_mask
    assert np.array_equal(once.ecg_peaks, twice.ecg_peaks)


def test_arrays_are_read_only():
    ts = TimeSeries(np.arange(5.0), 1.0)
    with pytest.raises(ValueError):
        ts.samples[0] = 1.0


intervals = st.lists(st.tuples(st.integers(0, 500), st.integers(1, 60)), max_size=12).map(
    lambda xs: [(a, a + w) for a, w in xs]
)


@given(intervals)
def test_merge_is_disjoint_and_covers_union(ivs):
    merged = merge_intervals(ivs)
    for (a0, b0), (a1, b1) in zip(merged, merged[1:]):
        assert b0 < a1
    covered = np.zeros(600, bool)
    for a, b in ivs:
        covered[a:b] = True
    out = np.zeros(600, bool)
    for a, b in merged:
        out[a:b] = True
    assert np.array_equal(covered, out)


@given(st.lists(st.integers(0, 40), min_size=1, max_size=10, unique=True))
def test_merge_preserves_count_of_disjoint_input(starts):
    ivs = [(10 * s, 10 * s + 5) for s in starts]
    merged = merge_intervals(ivs)
    assert sum(b - a for a, b in merged) == 5 * len(starts)


def test_cycle_pair_set_shape_checks():
    with pytest.raises(ValueError):
        CyclePairSet(np.zeros((3, 4)), np.zeros((3, 5)), "R2R", 4, np.zeros((3, 2)))
    with pytest.raises(ValueError):
        CyclePairSet(np.zeros((3, 4)), np.zeros((3, 4)), "XYZ", 4, np.zeros((3, 2)))


def test_coefficient_set_counts():
    cs = CoefficientSet(np.zeros((5, 3)), np.zeros((5, 7)), 10)
    assert (cs.L_x, cs.L_y, len(cs)) == (3, 7, 5)
    with pytest.raises(ValueError):
        CoefficientSet(np.zeros((5, 11)), np.zeros((5, 3)), 10)


def test_transform_model_rejects_nonfinite():
    with pytest.raises(ValueError):
        TransformModel(np.array([[np.inf]]), 1.0, 4)
    m = TransformModel(np.ones((2, 3)), 1.0, 4)
    assert (m.L_x, m.L_y) == (2, 3)
