"""From a raw session to aligned, detrended, segmented and normalized cycle pairs.

Order of operations in :func:`preprocess_session`:

    peaks -> cycle delay -> sample alignment -> detrend -> segment -> scale/normalize
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solveh_banded
from scipy.ndimage import maximum_filter1d, uniform_filter1d
from scipy.signal import find_peaks

from .config import PipelineConfig
from .errors import (
    AllCyclesDegenerate,
    EmptyOverlap,
    InsufficientPeaks,
    NoValidCycles,
    NumericalError,
    SignalTooShort,
    TooFewPeaks,
)
from .signal_model import CyclePairSet, PeakTrain, Session, TimeSeries, merge_intervals

log = logging.getLogger(__name__)

DEFAULT_K = 5
DEFAULT_LAMBDA = 500.0
MIN_CYCLE_S = 0.25
MAX_CYCLE_S = 2.0
DEGENERATE_STD = 1e-12
PPG_SMOOTH_S = 0.05


# ---------------------------------------------------------------------------
# peak detection
# ---------------------------------------------------------------------------

def _adaptive_threshold(x, win, n_std):
    mean = uniform_filter1d(x, win, mode="nearest")
    var = uniform_filter1d(x * x, win, mode="nearest") - mean * mean
    std = np.sqrt(np.clip(var, 0.0, None))
    # 2-sigma alone sits above the crest of smooth periodic waves (crest of a
    # sinusoid is 1.41 sigma), so cap it at half the local crest height
    crest = maximum_filter1d(x, win, mode="nearest") - mean
    return mean + np.minimum(n_std * std, 0.5 * crest)


def _maxima(x, fs, window_s, n_std, refractory_frac, bootstrap_s):
    win = max(3, int(round(window_s * fs)))
    thr = _adaptive_threshold(x, win, n_std)
    boot = max(1, int(round(bootstrap_s * fs)))
    idx, _ = find_peaks(x, height=thr, distance=boot)
    if idx.size < 3:
        raise TooFewPeaks(f"only {idx.size} peaks found")
    refractory = max(1, int(round(refractory_frac * np.median(np.diff(idx)))))
    idx, _ = find_peaks(x, height=thr, distance=refractory)
    if idx.size < 3:
        raise TooFewPeaks(f"only {idx.size} peaks found")
    return idx


def onsets_from_systolic(ppg, systolic) -> np.ndarray:
    """Minimum sample between each systolic peak and the one before it.

    Returns one onset per systolic peak starting from the second, so
    ``onsets[j]`` belongs to ``systolic[j + 1]``.
    """
    x = np.asarray(ppg, dtype=float)
    sp_idx = np.asarray(systolic, dtype=np.int64)
    return np.array(
        [a + int(np.argmin(x[a:b])) for a, b in zip(sp_idx[:-1], sp_idx[1:])],
        dtype=np.int64,
    )


def detect_peaks(
    ts: TimeSeries,
    kind: str = "ecg_r",
    *,
    window_s: float = 2.0,
    n_std: float = 2.0,
    refractory_frac: float = 0.25,
    bootstrap_refractory_s: float = 0.25,
    smooth_s: float | None = None,
) -> PeakTrain:
    """Detect R peaks, PPG systolic peaks or PPG onsets.

    Peaks are local maxima above a rolling threshold (``window_s`` mean plus
    ``n_std`` rolling standard deviations, capped at half the local crest),
    separated by a refractory period of ``refractory_frac`` times the median
    inter-peak interval. A first pass with ``bootstrap_refractory_s``
    supplies that median.

    PPG peaks are located on a ``smooth_s`` moving average (default 50 ms)
    because the flat systolic crest makes raw-sample maxima noise-driven.
    ECG is left unsmoothed by default. Onsets are always taken from the raw
    signal.
    """
    x = ts.samples
    if len(x) < 2 * ts.fs:
        raise SignalTooShort(f"need at least 2 s of samples, got {len(x)}")
    if kind not in ("ecg_r", "ppg_systolic", "ppg_onset"):
        raise ValueError(f"unknown peak kind {kind!r}")
    if smooth_s is None:
        smooth_s = 0.0 if kind == "ecg_r" else PPG_SMOOTH_S
    w = int(round(smooth_s * ts.fs))
    xs = uniform_filter1d(x, w, mode="nearest") if w > 1 else x
    idx = _maxima(xs, ts.fs, window_s, n_std, refractory_frac, bootstrap_refractory_s)
    if kind == "ppg_onset":
        idx = onsets_from_systolic(x, idx)
    return PeakTrain(idx, kind)


# ---------------------------------------------------------------------------
# alignment
# ---------------------------------------------------------------------------

def _delay_cost(sp_idx, rp_idx, n, m):
    i_sp = -n if n < 0 else 0
    i_rp = n if n > 0 else 0
    a = sp_idx[i_sp:i_sp + m] - sp_idx[i_sp]
    b = rp_idx[i_rp:i_rp + m] - rp_idx[i_rp]
    return int(np.abs(a - b).sum())


def estimate_cycle_delay(sp: PeakTrain, rp: PeakTrain, k: int = DEFAULT_K) -> int:
    """Cycle offset between PPG systolic peaks and ECG R peaks.

    For every candidate ``n`` in ``[-k, k]`` both trains are re-referenced to
    their first paired peak and the summed absolute timing discrepancy over
    ``N - k`` pairs is evaluated. A positive result means PPG peak ``i``
    belongs to the same beat as R peak ``i + n``. Ties go to the smallest
    ``|n|``, then to the negative candidate.
    """
    a = np.asarray(getattr(sp, "indices", sp), dtype=np.int64)
    b = np.asarray(getattr(rp, "indices", rp), dtype=np.int64)
    N = min(a.size, b.size)
    if N < k + 2:
        raise InsufficientPeaks(f"need at least {k + 2} peaks per train, got {N}")
    m = N - k
    costs = {n: _delay_cost(a, b, n, m) for n in range(-k, k + 1)}
    return min(costs, key=lambda n: (costs[n], abs(n), n))


@dataclass(frozen=True, eq=False)
class AlignmentResult:
    """Output of :func:`align_to_sample`.

    ``origin`` is the index in the original ECG timeline of aligned sample 0.
    PPG sample ``t`` of the raw record lands at ECG index ``t + sample_shift``.
    """

    cycle_delay: int
    sample_shift: int
    ppg: TimeSeries
    ecg: TimeSeries
    r_peaks: PeakTrain
    artifact_mask: tuple
    origin: int


def align_to_sample(
    s: Session,
    delay: int,
    systolic: PeakTrain,
    r_peaks: PeakTrain,
) -> AlignmentResult:
    """Shift the PPG so that pulse onsets coincide with their R peaks.

    Onsets are paired with R peaks using the cycle ``delay``; the median
    R-minus-onset offset is applied as one integer shift. Samples shifted
    out of the common support are dropped from both channels.
    """
    x, y = s.ppg.samples, s.ecg.samples
    T = min(len(x), len(y))
    sp_idx, rp_idx = systolic.indices, r_peaks.indices
    onsets = onsets_from_systolic(x, sp_idx)

    offsets = []
    for j, onset in enumerate(onsets):
        i_rp = j + 1 + delay
        if 0 <= i_rp < rp_idx.size:
            offsets.append(rp_idx[i_rp] - onset)
    if not offsets:
        raise InsufficientPeaks("no onset/R-peak pairs for the given delay")
    shift = int(np.round(np.median(offsets)))

    lo, hi = max(0, shift), min(T, T + shift)
    if hi - lo < 1:
        raise EmptyOverlap(f"shift of {shift} samples leaves no common support")
    ecg = TimeSeries(y[lo:hi], s.ecg.fs)
    ppg = TimeSeries(x[lo - shift:hi - shift], s.ppg.fs)
    rp_new = rp_idx - lo
    rp_new = rp_new[(rp_new >= 0) & (rp_new < hi - lo)]

    mask = [(a - lo, b - lo) for a, b in s.artifact_mask]
    mask += [(a + shift - lo, b + shift - lo) for a, b in s.artifact_mask]
    return AlignmentResult(
        cycle_delay=int(delay),
        sample_shift=shift,
        ppg=ppg,
        ecg=ecg,
        r_peaks=PeakTrain(rp_new, "ecg_r"),
        artifact_mask=merge_intervals(mask, hi - lo),
        origin=lo,
    )


# ---------------------------------------------------------------------------
# detrending
# ---------------------------------------------------------------------------

def second_difference(T: int) -> sp.csr_matrix:
    """T x T second-difference operator whose first and last rows are zero."""
    D = sp.diags([1.0, -2.0, 1.0], [0, 1, 2], shape=(T - 2, T))
    return sp.vstack([sp.csr_matrix((1, T)), D, sp.csr_matrix((1, T))]).tocsr()


def _smoother_bands(T, lam):
    # upper banded storage of I + lam * D2^T D2 for solveh_banded
    D = second_difference(T)
    DtD = (D.T @ D).todia()
    ab = np.zeros((3, T))
    ab[2] = 1.0 + lam * DtD.diagonal(0)
    ab[1, 1:] = lam * DtD.diagonal(1)
    ab[0, 2:] = lam * DtD.diagonal(2)
    return ab, DtD


def trend(x, lam: float = DEFAULT_LAMBDA) -> np.ndarray:
    """Smoothness-prior trend: solves ``(I + lam * D2^T D2) z = x``."""
    x = np.asarray(x, dtype=float)
    T = x.shape[0]
    if T < 3:
        raise SignalTooShort("detrending needs at least 3 samples")
    ab, DtD = _smoother_bands(T, lam)
    z = solveh_banded(ab, x, lower=False, check_finite=False)
    resid = z + lam * (DtD @ z) - x
    scale = np.linalg.norm(x)
    if scale > 0 and np.linalg.norm(resid) > 1e-8 * scale:
        raise NumericalError("banded detrend solve failed its residual check")
    return z


def detrend(ts, lam: float = DEFAULT_LAMBDA):
    """Subtract the smoothness-prior trend. Accepts a TimeSeries or an array."""
    if isinstance(ts, TimeSeries):
        return TimeSeries(ts.samples - trend(ts.samples, lam), ts.fs)
    x = np.asarray(ts, dtype=float)
    return x - trend(x, lam)


# ---------------------------------------------------------------------------
# segmentation and normalization
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RawCycle:
    ppg: np.ndarray
    ecg: np.ndarray
    start: int
    end: int


def cycle_bounds(r_peaks, scheme: str) -> list:
    """Candidate (start, end) boundaries before any filtering."""
    rp = [int(r) for r in np.asarray(getattr(r_peaks, "indices", r_peaks))]
    if scheme == "R2R":
        return list(zip(rp[:-1], rp[1:]))
    if scheme == "SR":
        return [
            (rp[i] - round((rp[i] - rp[i - 1]) / 3), rp[i + 1] - round((rp[i + 1] - rp[i]) / 3))
            for i in range(1, len(rp) - 1)
        ]
    raise ValueError(f"unknown scheme {scheme!r}")


def segment_cycles(ppg, ecg, r_peaks, scheme: str = "R2R", *, fs: float, artifact_mask=()) -> list:
    """Cut both channels at identical cycle boundaries derived from R peaks.

    R2R cycles span consecutive R peaks. SR cycles start a third of the
    preceding R-R interval before each R peak. Cycles touching the artifact
    mask, or shorter than 0.25 s / longer than 2 s, are dropped.
    """
    x = np.asarray(getattr(ppg, "samples", ppg), dtype=float)
    y = np.asarray(getattr(ecg, "samples", ecg), dtype=float)
    T = min(x.size, y.size)
    rp = np.asarray(getattr(r_peaks, "indices", r_peaks))
    if rp.size < 3:
        raise NoValidCycles(f"need at least 3 R peaks, got {rp.size}")
    lo_len, hi_len = MIN_CYCLE_S * fs, MAX_CYCLE_S * fs
    cycles = []
    for a, b in cycle_bounds(rp, scheme):
        if a < 0 or b > T or not lo_len <= b - a <= hi_len:
            continue
        if any(a < m_end and m_start < b for m_start, m_end in artifact_mask):
            continue
        cycles.append(RawCycle(x[a:b], y[a:b], a, b))
    if not cycles:
        raise NoValidCycles("every candidate cycle was rejected")
    return cycles


def resample_cycle(seg, L: int) -> np.ndarray:
    """Linear interpolation onto ``L`` points spanning the first to last sample."""
    seg = np.asarray(seg, dtype=float)
    return np.interp(np.linspace(0.0, seg.size - 1, L), np.arange(seg.size), seg)


def _znorm(rows):
    mu = rows.mean(axis=1, keepdims=True)
    sd = rows.std(axis=1, keepdims=True)
    return mu, sd


def scale_and_normalize(cycles, L: int = 300, scheme: str = "R2R", **meta) -> CyclePairSet:
    """Rescale every cycle to length ``L`` and z-normalize each row.

    Population standard deviation is used. Pairs where either channel is
    (numerically) constant are dropped and counted in ``n_degenerate``.
    """
    if L < 2:
        raise ValueError("L must be at least 2")
    kept_x, kept_y, bounds = [], [], []
    n_bad = 0
    for c in cycles:
        if len(c.ppg) < 2:
            n_bad += 1
            continue
        kept_x.append(resample_cycle(c.ppg, L))
        kept_y.append(resample_cycle(c.ecg, L))
        bounds.append((c.start, c.end))
    if not kept_x:
        raise AllCyclesDegenerate("no cycle has at least 2 samples")
    cx, cy = np.array(kept_x), np.array(kept_y)
    mx, sx = _znorm(cx)
    my, sy = _znorm(cy)
    ok = (sx[:, 0] >= DEGENERATE_STD) & (sy[:, 0] >= DEGENERATE_STD)
    n_bad += int((~ok).sum())
    if not ok.any():
        raise AllCyclesDegenerate("every cycle is constant")
    if n_bad:
        log.warning("dropped %d degenerate cycles", n_bad)
    cx = (cx[ok] - mx[ok]) / sx[ok]
    cy = (cy[ok] - my[ok]) / sy[ok]
    return CyclePairSet(
        c_x=cx, c_y=cy, scheme=scheme, L=L,
        boundaries=np.array(bounds)[ok], n_degenerate=n_bad, **meta,
    )


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------

def resolve_peaks(s: Session, peak_source: str = "auto"):
    """Systolic and R-peak trains from annotations or the detector."""
    use_ann = peak_source == "annotations" or (
        peak_source == "auto" and s.ppg_peaks is not None and s.ecg_peaks is not None
    )
    if use_ann:
        if s.ppg_peaks is None or s.ecg_peaks is None:
            raise InsufficientPeaks("session carries no peak annotations")
        return PeakTrain(s.ppg_peaks, "ppg_systolic"), PeakTrain(s.ecg_peaks, "ecg_r")
    return detect_peaks(s.ppg, "ppg_systolic"), detect_peaks(s.ecg, "ecg_r")


def align_session(s: Session, cfg: PipelineConfig = PipelineConfig()) -> AlignmentResult:
    systolic, r_peaks = resolve_peaks(s, cfg.peak_source)
    delay = estimate_cycle_delay(systolic, r_peaks, cfg.k)
    return align_to_sample(s, delay, systolic, r_peaks)


def preprocess_session(s: Session, cfg: PipelineConfig = PipelineConfig()) -> CyclePairSet:
    """Full preprocessing chain for one validated session."""
    al = align_session(s, cfg)
    ppg = detrend(al.ppg, cfg.lambda_detrend)
    ecg = detrend(al.ecg, cfg.lambda_detrend)
    cycles = segment_cycles(ppg, ecg, al.r_peaks, cfg.scheme, fs=s.fs, artifact_mask=al.artifact_mask)
    cps = scale_and_normalize(
        cycles, cfg.L, cfg.scheme, cycle_delay=al.cycle_delay, sample_shift=al.sample_shift
    )
    # report boundaries in the original ECG timeline
    return replace(cps, boundaries=cps.boundaries + al.origin)
