"""Core data types shared across the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (
    LengthMismatchBeyondTolerance,
    NonFiniteSample,
    NonMonotonePeaks,
    SamplingRateMismatch,
    UnitMismatch,
)

SCHEMES = ("SR", "R2R")
PEAK_KINDS = ("ecg_r", "ppg_systolic", "ppg_onset")

# relative length difference tolerated between the PPG and ECG channels
LENGTH_TOLERANCE = 0.01


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeSeries:
    samples: np.ndarray
    fs: float

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(np.ravel(self.samples)))
        if not self.fs > 0:
            raise UnitMismatch(f"sampling rate must be positive, got {self.fs}")
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.fs


@dataclass(frozen=True, eq=False)
class PeakTrain:
    indices: np.ndarray
    kind: str = "ecg_r"

    def __post_init__(self):
        idx = _frozen(np.ravel(self.indices), dtype=np.int64)
        if idx.size > 1 and np.any(np.diff(idx) <= 0):
            raise NonMonotonePeaks(f"{self.kind} indices are not strictly increasing")
        if self.kind not in PEAK_KINDS:
            raise ValueError(f"unknown peak kind {self.kind!r}")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return self.indices.shape[0]


@dataclass(frozen=True, eq=False)
class Session:
    """One subject's simultaneously recorded PPG/ECG pair plus metadata.

    ``artifact_mask`` holds half-open ``(start, end)`` sample intervals.
    Peak annotations, when given, are sample indices of PPG systolic peaks
    and ECG R peaks respectively.
    """

    ppg: TimeSeries
    ecg: TimeSeries
    age: Optional[float] = None
    weight: Optional[float] = None
    artifact_mask: tuple = ()
    ppg_peaks: Optional[np.ndarray] = None
    ecg_peaks: Optional[np.ndarray] = None
    session_id: str = ""

    def __post_init__(self):
        mask = tuple((int(a), int(b)) for a, b in self.artifact_mask)
        object.__setattr__(self, "artifact_mask", mask)
        for name in ("ppg_peaks", "ecg_peaks"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _frozen(np.ravel(val), dtype=np.int64))

    @property
    def fs(self) -> float:
        return self.ecg.fs

    def __len__(self):
        return min(len(self.ppg), len(self.ecg))


@dataclass(frozen=True, eq=False)
class CyclePairSet:
    """Aligned, temporally scaled and z-normalized PPG/ECG cycles.

    ``boundaries`` are ``(start, end)`` indices into the original ECG
    timeline, one row per cycle.
    """

    c_x: np.ndarray
    c_y: np.ndarray
    scheme: str
    L: int
    boundaries: np.ndarray
    cycle_delay: int = 0
    sample_shift: int = 0
    n_degenerate: int = 0

    def __post_init__(self):
        object.__setattr__(self, "c_x", _frozen(self.c_x))
        object.__setattr__(self, "c_y", _frozen(self.c_y))
        object.__setattr__(
            self, "boundaries", _frozen(np.reshape(self.boundaries, (-1, 2)), dtype=np.int64)
        )
        if self.c_x.shape != self.c_y.shape or self.c_x.shape[1:] != (self.L,):
            raise ValueError("c_x and c_y must both be N x L")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def n_cycles(self) -> int:
        return self.c_x.shape[0]


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    x_trunc: np.ndarray
    y_trunc: np.ndarray
    L: int

    def __post_init__(self):
        object.__setattr__(self, "x_trunc", _frozen(np.atleast_2d(self.x_trunc)))
        object.__setattr__(self, "y_trunc", _frozen(np.atleast_2d(self.y_trunc)))
        if not (1 <= self.L_x <= self.L and 1 <= self.L_y <= self.L):
            raise ValueError("coefficient counts must lie in [1, L]")
        if self.x_trunc.shape[0] != self.y_trunc.shape[0]:
            raise ValueError("x_trunc and y_trunc must have the same number of rows")

    @property
    def L_x(self) -> int:
        return self.x_trunc.shape[1]

    @property
    def L_y(self) -> int:
        return self.y_trunc.shape[1]

    def __len__(self):
        return self.x_trunc.shape[0]


@dataclass(frozen=True, eq=False)
class TransformModel:
    """Learned linear map from PPG to ECG DCT coefficients."""

    f_star: np.ndarray
    gamma: float
    L: int
    scheme: str = "R2R"
    lambda_detrend: float = 500.0

    def __post_init__(self):
        f = _frozen(np.atleast_2d(self.f_star))
        if not np.all(np.isfinite(f)):
            raise ValueError("f_star has non-finite entries")
        object.__setattr__(self, "f_star", f)
        if self.L_y > self.L or self.L_x > self.L:
            raise ValueError("coefficient counts exceed L")

    @property
    def L_x(self) -> int:
        return self.f_star.shape[0]

    @property
    def L_y(self) -> int:
        return self.f_star.shape[1]


def merge_intervals(intervals, upper=None):
    """Union of half-open intervals, clipped to ``[0, upper)``; touching runs are joined."""
    spans = []
    for a, b in intervals:
        a, b = int(a), int(b)
        a = max(a, 0)
        if upper is not None:
            b = min(b, upper)
        if b > a:
            spans.append((a, b))
    spans.sort()
    merged = []
    for a, b in spans:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return tuple(merged)


def _check_peaks(peaks, T, name):
    if peaks is None:
        return None
    peaks = np.asarray(peaks, dtype=np.int64)
    if peaks.size > 1 and np.any(np.diff(peaks) <= 0):
        raise NonMonotonePeaks(f"{name} are not strictly increasing")
    return peaks[(peaks >= 0) & (peaks < T)]


def validate_session(s: Session) -> Session:
    """Return a cleaned copy of ``s`` or raise a :class:`DataError`.

    Signals are truncated to a common length (if they differ by at most 1%),
    artifact intervals are clipped and merged, and peak annotations are
    checked for monotonicity. The function is idempotent.
    """
    if s.ppg.fs != s.ecg.fs:
        raise SamplingRateMismatch(f"ppg fs {s.ppg.fs} != ecg fs {s.ecg.fs}")
    for name, ts in (("ppg", s.ppg), ("ecg", s.ecg)):
        bad = np.flatnonzero(~np.isfinite(ts.samples))
        if bad.size:
            raise NonFiniteSample(bad[0], name)

    n_ppg, n_ecg = len(s.ppg), len(s.ecg)
    T = min(n_ppg, n_ecg)
    if abs(n_ppg - n_ecg) > LENGTH_TOLERANCE * max(n_ppg, n_ecg):
        raise LengthMismatchBeyondTolerance(
            f"ppg has {n_ppg} samples, ecg has {n_ecg} (more than 1% apart)"
        )
    ppg, ecg = s.ppg, s.ecg
    if n_ppg != T:
        ppg = TimeSeries(ppg.samples[:T], ppg.fs)
    if n_ecg != T:
        ecg = TimeSeries(ecg.samples[:T], ecg.fs)

    return replace(
        s,
        ppg=ppg,
        ecg=ecg,
        artifact_mask=merge_intervals(s.artifact_mask, T),
        ppg_peaks=_check_peaks(s.ppg_peaks, T, "ppg_peaks"),
        ecg_peaks=_check_peaks(s.ecg_peaks, T, "ecg_peaks"),
    )
