"""Orthonormal DCT-II analysis/synthesis and coefficient truncation."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import BadCount, LengthMismatch


def dct_basis(L: int) -> np.ndarray:
    """Explicit orthonormal DCT-II matrix ``B`` (row ``k`` is basis vector ``k``).

    ``B @ x`` gives the forward transform and ``B.T @ c`` the inverse.
    Used as the direct O(L^2) reference for the fast path.
    """
    n = np.arange(L)
    k = np.arange(L)[:, None]
    B = np.cos(np.pi * (2 * n + 1) * k / (2 * L))
    B[0] *= np.sqrt(1.0 / L)
    B[1:] *= np.sqrt(2.0 / L)
    return B


@dataclass(frozen=True)
class DctPlan:
    L: int

    @cached_property
    def basis(self) -> np.ndarray:
        return dct_basis(self.L)

    def forward(self, rows):
        return dct_forward(rows, self.L)

    def inverse(self, coeffs):
        return dct_inverse(coeffs, self.L)


def _check_length(a, L):
    a = np.asarray(a, dtype=float)
    if L is not None and a.shape[-1] != L:
        raise LengthMismatch(f"expected length {L}, got {a.shape[-1]}")
    return a


def dct_forward(x, L=None) -> np.ndarray:
    """Orthonormal DCT-II along the last axis."""
    x = _check_length(x, L)
    return scipy.fft.dct(x, type=2, norm="ortho", axis=-1)


def dct_inverse(c, L=None) -> np.ndarray:
    """Inverse of :func:`dct_forward` (orthonormal DCT-III)."""
    c = _check_length(c, L)
    return scipy.fft.idct(c, type=2, norm="ortho", axis=-1)


def truncate(coeffs, m: int) -> np.ndarray:
    """Keep the first ``m`` coefficients of every row."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    L = coeffs.shape[1]
    if not 1 <= m <= L:
        raise BadCount(f"cannot keep {m} of {L} coefficients")
    return coeffs[:, :m].copy()


def zero_pad(coeffs, L: int) -> np.ndarray:
    """Append zero columns so every row has length ``L``."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    m = coeffs.shape[1]
    if m > L:
        raise BadCount(f"{m} coefficients do not fit in length {L}")
    out = np.zeros((coeffs.shape[0], L))
    out[:, :m] = coeffs
    return out
