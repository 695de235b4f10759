"""Reconstruction metrics, L_x sweeps, aggregates and the profile F-test."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from ._jsonio import format_float
from .config import PipelineConfig
from .errors import (
    ConstantInput,
    DimensionMismatch,
    NumericalError,
    RankDeficientDesign,
    TooFewSessions,
    ZeroReference,
)
from .preprocess import preprocess_session
from .regression import SubjectRun, run_on_cycles
from .signal_model import Session, validate_session

DEFAULT_GRID = tuple(range(2, 41, 2))
CSV_FIELDS = ("session_id", "scheme", "l_x", "rrmse", "rho", "age", "weight")


def _pair(y, y_hat, min_len):
    y = np.ravel(np.asarray(y, dtype=float))
    y_hat = np.ravel(np.asarray(y_hat, dtype=float))
    if y.shape != y_hat.shape:
        raise DimensionMismatch(f"lengths differ: {y.size} vs {y_hat.size}")
    if y.size < min_len:
        raise DimensionMismatch(f"need at least {min_len} samples")
    return y, y_hat


def rrmse(y, y_hat) -> float:
    """``||y - y_hat|| / ||y||``."""
    y, y_hat = _pair(y, y_hat, 1)
    ref = np.linalg.norm(y)
    if ref == 0:
        raise ZeroReference("reference signal has zero norm")
    return float(np.linalg.norm(y - y_hat) / ref)


def pearson(y, y_hat) -> float:
    """Pearson correlation, clamped to [-1, 1]."""
    y, y_hat = _pair(y, y_hat, 2)
    a = y - y.mean()
    b = y_hat - y_hat.mean()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ConstantInput("pearson correlation of a constant vector")
    r = float((a / na) @ (b / nb))
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class SessionMetrics:
    rrmse: float
    rho: float
    n_test_cycles: int
    scheme: str
    l_x: int
    session_id: str = ""
    age: Optional[float] = None
    weight: Optional[float] = None

    def __post_init__(self):
        if not (self.rrmse >= 0 and -1 <= self.rho <= 1):
            raise ValueError(f"metrics out of range: rrmse={self.rrmse}, rho={self.rho}")

    def to_dict(self) -> dict:
        return asdict(self)


def metrics_for(run: SubjectRun, session: Optional[Session] = None) -> SessionMetrics:
    meta = {}
    if session is not None:
        meta = dict(session_id=session.session_id, age=session.age, weight=session.weight)
    return SessionMetrics(
        rrmse=rrmse(run.reference, run.reconstruction),
        rho=pearson(run.reference, run.reconstruction),
        n_test_cycles=run.n_test,
        scheme=run.model.scheme,
        l_x=run.model.L_x,
        **meta,
    )


def evaluate_session(s: Session, cfg: PipelineConfig = PipelineConfig()) -> SessionMetrics:
    s = validate_session(s)
    return metrics_for(run_on_cycles(preprocess_session(s, cfg), cfg), s)


def sweep_lx(s: Session, grid: Sequence[int] = DEFAULT_GRID, cfg: PipelineConfig = PipelineConfig()):
    """Metrics for each ``L_x`` in ``grid``; the session is preprocessed once.

    Grid values above ``cfg.L_y`` are allowed (up to ``L``), so ``grid=[L]``
    reproduces an untruncated PPG input.
    """
    grid = [int(g) for g in grid]
    bad = [g for g in grid if not 1 <= g <= cfg.L]
    if bad:
        raise DimensionMismatch(f"grid values outside [1, {cfg.L}]: {bad}")
    s = validate_session(s)
    cps = preprocess_session(s, cfg)
    return [(g, metrics_for(run_on_cycles(cps, cfg, L_x=g), s)) for g in grid]


def parse_grid(text: str):
    """``"2:2:40"`` (start:step:stop, inclusive) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) == 2:
            start, stop, step = parts[0], parts[1], 1
        elif len(parts) == 3:
            start, step, stop = parts
        else:
            raise ValueError(f"bad grid {text!r}")
        if step <= 0:
            raise ValueError("grid step must be positive")
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.split(",") if p.strip()]


def aggregate(metrics: Sequence[SessionMetrics]) -> dict:
    """Sample mean and (n - 1) standard deviation of each metric."""
    n = len(metrics)
    if n < 2:
        raise TooFewSessions(f"need at least 2 sessions, got {n}")
    out = {"n": n}
    for name in ("rrmse", "rho"):
        vals = [float(getattr(m, name)) for m in metrics]
        # fsum is correctly rounded, so the result does not depend on order
        mean = math.fsum(vals) / n
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (n - 1))
        out[name] = {"mean": mean, "std": std}
    return out


# -- profile regression -----------------------------------------------------

_TINY = 1e-300
_CF_EPS = 1e-16
_CF_MAX_ITER = 10000


def _beta_cf(a, b, x):
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise NumericalError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0, 1]")
    if x == 0 or x == 1:
        return float(x)
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # the fraction converges fast for x < (a + 1) / (a + b + 2); use symmetry otherwise
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def f_sf(f: float, d1: float, d2: float) -> float:
    """Upper tail ``P(F > f)`` of the F(d1, d2) distribution."""
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return betainc_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))


@dataclass(frozen=True)
class ProfileRegressionResult:
    coefficients: tuple
    r_squared: float
    f_statistic: float
    p_value: float
    n: int

    def to_dict(self) -> dict:
        return {
            "coefficients": dict(zip(("intercept", "age", "weight", "age_x_weight"), self.coefficients)),
            "r_squared": self.r_squared,
            # a perfect fit has an unbounded statistic, which JSON cannot carry
            "f_statistic": self.f_statistic if math.isfinite(self.f_statistic) else None,
            "p_value": self.p_value,
            "n": self.n,
        }


PERFECT_FIT_TOL = 1e-10


def profile_regression(rows) -> ProfileRegressionResult:
    """OLS of a metric on ``[1, age, weight, age*weight]`` with the overall F-test.

    Parameters
    ----------
    rows : iterable of (age, weight, metric)
    """
    data = np.asarray(list(rows), dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise DimensionMismatch("rows must be (age, weight, metric) triples")
    n = data.shape[0]
    if n < 5:
        raise TooFewSessions(f"need at least 5 sessions, got {n}")
    if not np.all(np.isfinite(data)):
        raise RankDeficientDesign("missing or non-finite age, weight or metric")
    age, weight, y = data.T
    A = np.column_stack([np.ones(n), age, weight, age * weight])
    if np.linalg.matrix_rank(A) < 4:
        raise RankDeficientDesign("design matrix [1, age, weight, age*weight] has rank < 4")

    beta, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ beta
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(resid @ resid)
    d1, d2 = 3, n - 4
    if ss_tot <= PERFECT_FIT_TOL * max(1.0, float(y @ y)):
        r2, F, p = 0.0, 0.0, 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
        if 1.0 - r2 <= PERFECT_FIT_TOL:
            r2, F, p = 1.0, math.inf, 0.0
        else:
            F = (r2 / d1) / ((1.0 - r2) / d2)
            p = f_sf(F, d1, d2)
    return ProfileRegressionResult(tuple(float(b) for b in beta), r2, F, p, n)


# -- reports ----------------------------------------------------------------

def evaluation_report(metrics: Sequence[SessionMetrics], cfg: PipelineConfig) -> dict:
    metrics = sorted(metrics, key=lambda m: m.session_id)
    report = {
        "kind": "evaluation",
        "config": cfg.to_dict(),
        "sessions": [m.to_dict() for m in metrics],
    }
    if len(metrics) >= 2:
        report["aggregate"] = aggregate(metrics)
    return report


def sweep_report(curves: dict, cfg: PipelineConfig) -> dict:
    """``curves`` maps session id to the output of :func:`sweep_lx`."""
    sessions = []
    grid = None
    for sid in sorted(curves):
        pts = curves[sid]
        grid = [g for g, _ in pts]
        sessions.append({"session_id": sid, "points": [m.to_dict() for _, m in pts]})
    report = {"kind": "sweep", "config": cfg.to_dict(), "grid": grid or [], "sessions": sessions}
    if len(sessions) >= 2:
        report["aggregate"] = [
            {"l_x": g, **aggregate([curves[sid][i][1] for sid in sorted(curves)])}
            for i, g in enumerate(grid)
        ]
    return report


def profile_report(report: dict) -> dict:
    """OLS + F-test of each metric in an evaluation report against age and weight."""
    rows = [s for s in report["sessions"] if s.get("age") is not None and s.get("weight") is not None]
    out = {"kind": "profile_test", "n": len(rows), "scheme": sorted({s["scheme"] for s in rows})}
    for name in ("rrmse", "rho"):
        res = profile_regression((s["age"], s["weight"], s[name]) for s in rows)
        out[name] = res.to_dict()
    return out


def metrics_csv(metrics: Sequence[SessionMetrics]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for m in sorted(metrics, key=lambda m: (m.session_id, m.l_x)):
        row = []
        for f in CSV_FIELDS:
            v = getattr(m, f)
            row.append("" if v is None else format_float(v) if isinstance(v, float) else v)
        w.writerow(row)
    return buf.getvalue()
