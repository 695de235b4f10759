"""Synthetic PPG/ECG sessions with known ground truth.

Each heartbeat is built in the aligned R-to-R frame: the ECG R peak and the
PPG onset both sit at phase 0 of the cycle. A cycle of ``ell`` samples maps
sample ``j`` onto the continuous grid position ``p = j * (GRID - 1) / (ell - 1)``,
which is exactly the grid the pipeline resamples onto when ``L == GRID``.
Both channels are stored as orthonormal DCT-II coefficients on that grid
and evaluated continuously at the sample positions.

Coupling modes
--------------
``template``
    Every cycle repeats the nominal PPG and ECG shapes; only the cycle
    length varies.
``linear_dct``
    The PPG cycle's DCT coefficients ``1 .. n_couple-1`` are
    ``r * (cos(t) * u0 + sin(t) * U @ w)`` with ``u0`` the nominal low-band
    direction, ``U`` an orthonormal basis of its complement, ``w`` a random
    unit vector per cycle and ``sin(t) = ppg_variation``. Higher PPG
    coefficients are fixed. The ECG coefficients are ``x[:n_couple] @ F_true``,
    which equals ``sqrt(GRID) * (a * e0 + b * V.T @ w)`` with orthonormal
    ``e0``, ``V`` and ``a**2 + b**2 = 1``, ``b = ecg_variation``. Both
    channels therefore have exactly zero mean and unit variance on the grid
    and the coupling is exactly linear.

The PPG channel is finally delayed by ``ppg_delay`` samples to emulate the
pulse transit time; white noise and baseline wander may be added.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from .errors import InvalidConfig
from .signal_model import Session, TimeSeries
from .spectral import dct_forward

GRID = 300
BAND = 100

# (centre, width, amplitude) as fractions of the cycle; R sits at phase 0
ECG_WAVES = {
    "R": (0.0, 0.012, 1.0),
    "S": (0.035, 0.010, -0.25),
    "T": (0.33, 0.045, 0.12),
    "P": (0.78, 0.030, 0.10),
    "Q": (0.965, 0.008, -0.10),
}

# systolic and dicrotic waves: (centre, width, amplitude)
PPG_WAVES = {
    "systolic": (0.16, 0.055, 1.0),
    "dicrotic": (0.40, 0.080, 0.35),
}
ONSET_DEPTH = 0.3
ONSET_TAU = 0.02

ECG_GAIN = 0.15  # mV per unit of normalized ECG
PPG_OFFSET = 2.0


@dataclass(frozen=True)
class SynthConfig:
    fs: float = 300.0
    duration_s: float = 480.0
    hr_mean: float = 75.0
    hr_jitter: float = 0.03
    coupling: str = "linear_dct"
    noise_std: float = 0.0
    seed: int = 0
    ppg_delay: int = 0
    n_couple: int = 8
    ppg_variation: float = 0.15
    ecg_variation: float = 0.2
    baseline_wander: float = 0.1
    age: Optional[float] = None
    weight: Optional[float] = None
    artifact_intervals: tuple = ()
    session_id: str = "synthetic"

    def __post_init__(self):
        if not (self.fs > 0 and self.duration_s > 0 and self.hr_mean > 0):
            raise InvalidConfig("fs, duration_s and hr_mean must be positive")
        if not 0 <= self.hr_jitter <= 0.2:
            raise InvalidConfig("hr_jitter must lie in [0, 0.2]")
        if self.coupling not in ("template", "linear_dct"):
            raise InvalidConfig(f"unknown coupling {self.coupling!r}")
        if self.noise_std < 0:
            raise InvalidConfig("noise_std must be nonnegative")
        if not 3 <= self.n_couple <= BAND:
            raise InvalidConfig(f"n_couple must lie in [3, {BAND}]")
        if not (0 < self.ppg_variation < 1 and 0 <= self.ecg_variation < 1):
            raise InvalidConfig("variations must lie in (0, 1)")
        if self.ppg_delay < 0:
            raise InvalidConfig("ppg_delay must be nonnegative")
        beat = self.fs * 60.0 / self.hr_mean
        if beat < 0.3 * self.fs or beat > 1.9 * self.fs:
            raise InvalidConfig("hr_mean outside roughly 32-200 bpm")
        object.__setattr__(
            self, "artifact_intervals", tuple(tuple(map(int, iv)) for iv in self.artifact_intervals)
        )

    @classmethod
    def from_dict(cls, data: dict) -> "SynthConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"unknown synth config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["artifact_intervals"] = [list(iv) for iv in self.artifact_intervals]
        return d


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Ground truth of one generated session.

    Indices refer to the emitted record. ``n_cycles`` counts heartbeats whose
    window, starting a third of a nominal beat before the R peak and lasting
    one cycle length, lies entirely inside the record.
    """

    r_peaks: np.ndarray
    systolic_peaks: np.ndarray
    onsets: np.ndarray
    n_cycles: int
    ppg_delay: int
    cycle_lengths: np.ndarray
    F_true: Optional[np.ndarray] = None


def _gauss(p, centre, width):
    return np.exp(-0.5 * ((p - centre) / width) ** 2)


def ecg_template(p) -> np.ndarray:
    """Nominal ECG cycle on the grid (R peak at p = 0)."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    for c, w, a in ECG_WAVES.values():
        out += a * _gauss(p, c * GRID, w * GRID)
    return out


def ppg_template(p) -> np.ndarray:
    """Nominal PPG cycle on the grid with its onset (a cusp minimum) at p = 0."""
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    for shift in (-GRID, 0.0, GRID):
        q = p - shift
        for c, w, a in PPG_WAVES.values():
            out += a * _gauss(q, c * GRID, w * GRID)
        out -= ONSET_DEPTH * np.exp(-np.abs(q) / (ONSET_TAU * GRID))
    return out


def _unit_coeffs(v):
    """Band-limited, zero-mean DCT coefficients with norm sqrt(GRID)."""
    c = dct_forward(v)
    c[0] = 0.0
    c[BAND:] = 0.0
    return c * np.sqrt(GRID) / np.linalg.norm(c)


def idct_at(coeffs, p) -> np.ndarray:
    """Evaluate the orthonormal inverse DCT of ``coeffs`` at real positions ``p``."""
    L = coeffs.size
    k = np.arange(L)
    scale = np.full(L, np.sqrt(2.0 / L))
    scale[0] = np.sqrt(1.0 / L)
    basis = np.cos(np.pi * np.outer(2 * np.asarray(p, dtype=float) + 1, k) / (2 * L))
    return basis @ (coeffs * scale)


def _ecg_variants(grid):
    base = ecg_template(grid)
    R, S, T, P = (ECG_WAVES[k] for k in "RSTP")

    def g(c, w):
        return _gauss(grid, c * GRID, w * GRID)

    return [
        base + 0.5 * T[2] * g(T[0], T[1]),
        base + T[2] * (g(T[0] + 0.03, T[1]) - g(T[0], T[1])),
        base + P[2] * g(P[0], P[1]),
        base + 0.5 * S[2] * g(S[0], S[1]),
        base + 0.04 * g(0.15, 0.06),
        base + R[2] * (g(0.0, 1.3 * R[1]) - g(0.0, R[1])),
        base - 0.04 * g(0.55, 0.08),
    ]


def _orthonormalize(vecs, against, count, rng):
    # Gram-Schmidt of ``vecs`` against ``against``; smooth random fill-ins if short
    basis = list(against)
    size = against[0].size
    out = []
    pool = iter(vecs)
    while len(out) < count:
        v = next(pool, None)
        if v is None:
            v = rng.standard_normal(size) * np.exp(-np.arange(size) / 20.0)
        v = np.array(v, dtype=float)
        v[0] = 0.0
        for b in basis:
            v -= (v @ b) * b
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            v /= nrm
            basis.append(v)
            out.append(v)
    return np.array(out)


class CouplingModel:
    """Fixed bases that tie per-cycle PPG and ECG coefficients together."""

    def __init__(self, n_couple=8, ppg_variation=0.15, ecg_variation=0.2, rng=None):
        rng = np.random.default_rng(0) if rng is None else rng
        grid = np.arange(GRID, dtype=float)
        n = n_couple
        self.n_couple = n
        self.sin_t = ppg_variation
        self.cos_t = np.sqrt(1.0 - ppg_variation**2)
        self.b = ecg_variation
        self.a = np.sqrt(1.0 - ecg_variation**2)

        self.ppg0 = _unit_coeffs(ppg_template(grid))
        low = self.ppg0[1:n]
        self.r = np.linalg.norm(low)
        self.u0 = low / self.r
        q, _ = np.linalg.qr(np.column_stack([self.u0, rng.standard_normal((n - 1, n - 2))]))
        self.U = q[:, 1:]

        self.ecg0 = _unit_coeffs(ecg_template(grid))
        e0 = self.ecg0[:BAND] / np.sqrt(GRID)
        variants = [_unit_coeffs(v)[:BAND] / np.sqrt(GRID) - e0 for v in _ecg_variants(grid)]
        self.e0 = e0
        self.V = _orthonormalize(variants, [e0], n - 2, rng)

        root = np.sqrt(GRID)
        F = np.zeros((n, BAND))
        F[1:] = np.outer(self.u0, root * self.a / (self.r * self.cos_t) * e0)
        F[1:] += self.U @ (root * self.b / (self.r * self.sin_t) * self.V)
        self.F = F

    def draw(self, rng):
        """Coefficient vectors (length GRID) of one coupled PPG/ECG cycle pair."""
        w = rng.standard_normal(self.n_couple - 2)
        w /= np.linalg.norm(w)
        x = self.ppg0.copy()
        x[1:self.n_couple] = self.r * (self.cos_t * self.u0 + self.sin_t * (self.U @ w))
        y = np.zeros(GRID)
        y[:BAND] = x[:self.n_couple] @ self.F
        return x, y


def coupling_matrix(n_couple=8, ppg_variation=0.15, ecg_variation=0.2, rng=None) -> np.ndarray:
    """``n_couple x BAND`` matrix mapping PPG to ECG DCT coefficients."""
    return CouplingModel(n_couple, ppg_variation, ecg_variation, rng).F


def _beat_lengths(cfg, rng, start, end, beat):
    nominal = int(round(beat))
    lo_len, hi_len = int(np.ceil(0.3 * cfg.fs)), int(np.floor(1.9 * cfg.fs))
    starts, lengths = [], []
    t = start
    while t < end:
        if cfg.hr_jitter == 0:
            ell = nominal
        else:
            ell = int(np.clip(round(beat * (1.0 + cfg.hr_jitter * rng.standard_normal())), lo_len, hi_len))
        starts.append(t)
        lengths.append(ell)
        t += ell
    return np.array(starts), np.array(lengths), t


def generate(cfg: SynthConfig = SynthConfig()):
    """Generate one session and its ground truth.

    Returns
    -------
    session : Session
    truth : GroundTruth
        R-peak, systolic-peak and onset indices in the emitted record, the
        number of heartbeats, the injected PPG delay and, for ``linear_dct``
        coupling, ``F_true``.
    """
    rng = np.random.default_rng(cfg.seed)
    fs = cfg.fs
    T = int(round(cfg.duration_s * fs))
    beat = fs * 60.0 / cfg.hr_mean
    nominal = int(round(beat))
    model = CouplingModel(cfg.n_couple, cfg.ppg_variation, cfg.ecg_variation, rng)

    # beats on an extended timeline so the delayed PPG is fully covered;
    # the first in-record R peak sits a third of a beat after sample 0
    r0 = int(round(beat / 3.0))
    n_pre = int(np.ceil((cfg.ppg_delay + r0) / nominal)) + 2
    start = r0 - n_pre * nominal
    starts, lengths, stop = _beat_lengths(cfg, rng, start, T + 2 * nominal, beat)

    ecg_ext = np.zeros(stop - start)
    ppg_ext = np.zeros(stop - start)
    sys_ext = np.zeros(starts.size, dtype=np.int64)
    for i, (s0, ell) in enumerate(zip(starts, lengths)):
        if cfg.coupling == "linear_dct":
            x, y = model.draw(rng)
        else:
            x, y = model.ppg0, model.ecg0
        p = np.arange(ell) * (GRID - 1) / (ell - 1)
        seg = idct_at(x, p)
        j = s0 - start
        ppg_ext[j:j + ell] = seg
        ecg_ext[j:j + ell] = idct_at(y, p)
        sys_ext[i] = s0 + int(np.argmax(seg))

    d = cfg.ppg_delay
    ecg = ECG_GAIN * ecg_ext[-start:-start + T]
    ppg = ppg_ext[-start - d:-start - d + T]
    if cfg.noise_std > 0:
        ecg = ecg + cfg.noise_std * ecg.std() * rng.standard_normal(T)
        ppg = ppg + cfg.noise_std * ppg.std() * rng.standard_normal(T)
    t_sec = np.arange(T) / fs
    wander = cfg.baseline_wander * np.sin(2 * np.pi * 0.25 * t_sec + 0.3)
    ecg = ecg + wander
    ppg = ppg + PPG_OFFSET + 0.5 * wander + 0.05 * t_sec / cfg.duration_s

    def inside(idx):
        return idx[(idx >= 0) & (idx < T)]

    r_in = (starts >= 0) & (starts < T)

    age = cfg.age if cfg.age is not None else float(np.round(rng.uniform(1.0, 80.0), 1))
    if cfg.weight is not None:
        weight = cfg.weight
    else:
        weight = float(np.round(np.clip(8.0 + 2.7 * min(age, 18.0) + rng.normal(0, 8.0), 8.0, 140.0), 1))

    session = Session(
        ppg=TimeSeries(ppg, fs),
        ecg=TimeSeries(ecg, fs),
        age=age,
        weight=weight,
        artifact_mask=cfg.artifact_intervals,
        session_id=cfg.session_id,
    )
    truth = GroundTruth(
        r_peaks=starts[r_in],
        systolic_peaks=inside(sys_ext + d),
        onsets=inside(starts + d),
        n_cycles=int(np.count_nonzero(r_in & (starts - r0 >= 0) & (starts - r0 + lengths <= T))),
        ppg_delay=d,
        cycle_lengths=lengths[r_in],
        F_true=model.F if cfg.coupling == "linear_dct" else None,
    )
    return session, truth
