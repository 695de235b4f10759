"""Ridge regression between PPG and ECG DCT coefficients, and waveform synthesis."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import _jsonio
from .config import PipelineConfig
from .errors import DimensionMismatch, InvalidConfig, SingularSystem, TooFewCycles
from .preprocess import preprocess_session
from .signal_model import CoefficientSet, CyclePairSet, Session, TransformModel, validate_session
from .spectral import dct_forward, dct_inverse, truncate, zero_pad

MODEL_VERSION = 1
COND_LIMIT = 1e12
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    policy: str = "chronological-prefix"

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise InvalidConfig("train_fraction must lie in (0, 1)")
        if self.policy != "chronological-prefix":
            raise InvalidConfig(f"unsupported split policy {self.policy!r}")

    def sizes(self, n: int):
        n_train = math.floor(self.train_fraction * n)
        if n < 2 or n_train < 1 or n - n_train < 1:
            raise TooFewCycles(f"cannot split {n} cycles with fraction {self.train_fraction}")
        return n_train, n - n_train


def split(cs: CoefficientSet, spec: SplitSpec = SplitSpec()):
    """Chronological prefix split into ``(train, test)`` coefficient sets."""
    n_train, _ = spec.sizes(len(cs))
    train = CoefficientSet(cs.x_trunc[:n_train], cs.y_trunc[:n_train], cs.L)
    test = CoefficientSet(cs.x_trunc[n_train:], cs.y_trunc[n_train:], cs.L)
    return train, test


def coefficients(cps: CyclePairSet, L_x: int, L_y: int) -> CoefficientSet:
    """Truncated DCT coefficients of every cycle pair."""
    X = truncate(dct_forward(cps.c_x, cps.L), L_x)
    Y = truncate(dct_forward(cps.c_y, cps.L), L_y)
    return CoefficientSet(X, Y, cps.L)


def train_ridge(X, Y, gamma: float = 10.0, *, L: Optional[int] = None, scheme="R2R",
                lambda_detrend=500.0) -> TransformModel:
    """Solve ``(X^T X + gamma I) F = X^T Y`` by Cholesky factorization.

    Parameters
    ----------
    X : (N, L_x) array
    Y : (N, L_y) array
    gamma : float
        Ridge penalty, nonnegative. With ``gamma == 0`` the Gram matrix must
        be well conditioned.
    L : int, optional
        Cycle length stored on the model; defaults to ``max(L_x, L_y)``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[0] != Y.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[0]} rows, Y has {Y.shape[0]}")
    if X.shape[0] < 1:
        raise TooFewCycles("no training rows")
    if gamma < 0:
        raise InvalidConfig("gamma must be nonnegative")

    G = X.T @ X
    rhs = X.T @ Y
    A = G + gamma * np.eye(G.shape[0])
    if gamma == 0 and np.linalg.cond(G) >= COND_LIMIT:
        raise SingularSystem("X^T X is singular to working precision; use gamma > 0")
    try:
        F = cho_solve(cho_factor(A), rhs)
    except LinAlgError as exc:
        raise SingularSystem(str(exc)) from None

    scale = np.linalg.norm(rhs)
    if scale > 0 and np.linalg.norm(A @ F - rhs) > RESIDUAL_TOL * scale:
        raise SingularSystem("normal-equation residual above tolerance")
    L = max(X.shape[1], Y.shape[1]) if L is None else L
    return TransformModel(F, float(gamma), int(L), scheme, float(lambda_detrend))


def predict(model: TransformModel, X_test) -> np.ndarray:
    X_test = np.atleast_2d(np.asarray(X_test, dtype=float))
    if X_test.shape[1] != model.L_x:
        raise DimensionMismatch(f"model expects {model.L_x} columns, got {X_test.shape[1]}")
    return X_test @ model.f_star


def reconstruct_waveform(model: TransformModel, coeffs_pred) -> np.ndarray:
    """Zero-pad, inverse-transform and concatenate predicted cycles."""
    coeffs_pred = np.atleast_2d(np.asarray(coeffs_pred, dtype=float))
    if coeffs_pred.shape[1] != model.L_y:
        raise DimensionMismatch(f"expected {model.L_y} coefficients, got {coeffs_pred.shape[1]}")
    return dct_inverse(zero_pad(coeffs_pred, model.L), model.L).ravel()


@dataclass(frozen=True, eq=False)
class SubjectRun:
    """Outcome of one subject-dependent train/test run.

    Iterates as ``(model, reconstruction, reference)``.
    """

    model: TransformModel
    reconstruction: np.ndarray
    reference: np.ndarray
    n_train: int
    n_test: int
    cycles: CyclePairSet

    def __iter__(self):
        return iter((self.model, self.reconstruction, self.reference))


def run_on_cycles(cps: CyclePairSet, cfg: PipelineConfig = PipelineConfig(), *,
                  L_x: Optional[int] = None) -> SubjectRun:
    """Train on the first cycles and reconstruct the rest.

    ``L_x`` overrides ``cfg.L_x`` (sweeps may exceed ``L_y``).
    """
    if cps.n_cycles < 2:
        raise TooFewCycles(f"only {cps.n_cycles} usable cycle(s)")
    L_x = cfg.L_x if L_x is None else L_x
    train, test = split(coefficients(cps, L_x, cfg.L_y), SplitSpec(cfg.train_fraction))
    model = train_ridge(
        train.x_trunc, train.y_trunc, cfg.gamma,
        L=cps.L, scheme=cps.scheme, lambda_detrend=cfg.lambda_detrend,
    )
    y_hat = reconstruct_waveform(model, predict(model, test.x_trunc))
    reference = cps.c_y[len(train):].ravel()
    return SubjectRun(model, y_hat, reference, len(train), len(test), cps)


def apply_model(cps: CyclePairSet, model: TransformModel, train_fraction: float = 0.8) -> SubjectRun:
    """Reconstruct the test cycles of ``cps`` with an already trained model."""
    if cps.L != model.L:
        raise DimensionMismatch(f"cycles have length {cps.L}, model expects {model.L}")
    train, test = split(coefficients(cps, model.L_x, model.L_y), SplitSpec(train_fraction))
    y_hat = reconstruct_waveform(model, predict(model, test.x_trunc))
    return SubjectRun(model, y_hat, cps.c_y[len(train):].ravel(), len(train), len(test), cps)


def config_for_model(model: TransformModel, cfg: PipelineConfig = PipelineConfig()) -> PipelineConfig:
    """``cfg`` with the settings a stored model was trained under."""
    return replace(
        cfg, scheme=model.scheme, L=model.L, L_x=model.L_x, L_y=model.L_y,
        gamma=model.gamma, lambda_detrend=model.lambda_detrend,
    )


def run_subject_dependent(s: Session, cfg: PipelineConfig = PipelineConfig()) -> SubjectRun:
    cps = preprocess_session(validate_session(s), cfg)
    return run_on_cycles(cps, cfg)


def model_to_dict(model: TransformModel) -> dict:
    return {
        "version": MODEL_VERSION,
        "scheme": model.scheme,
        "L": model.L,
        "L_x": model.L_x,
        "L_y": model.L_y,
        "gamma": model.gamma,
        "lambda_detrend": model.lambda_detrend,
        "f_star": model.f_star.ravel().tolist(),
    }


def model_from_dict(d: dict) -> TransformModel:
    try:
        if d["version"] != MODEL_VERSION:
            raise InvalidConfig(f"unsupported model version {d['version']}")
        L_x, L_y = int(d["L_x"]), int(d["L_y"])
        f = np.asarray(d["f_star"], dtype=float)
        if f.size != L_x * L_y:
            raise DimensionMismatch(f"f_star has {f.size} entries, expected {L_x * L_y}")
        return TransformModel(
            f.reshape(L_x, L_y), float(d["gamma"]), int(d["L"]), d["scheme"], float(d["lambda_detrend"])
        )
    except KeyError as exc:
        raise InvalidConfig(f"model file lacks field {exc}") from None


def save_model(model: TransformModel, path):
    _jsonio.dump(model_to_dict(model), path)


def load_model(path) -> TransformModel:
    return model_from_dict(_jsonio.load(path))
