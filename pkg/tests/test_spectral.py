import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from ppg2ecg.errors import BadCount, LengthMismatch
from ppg2ecg.spectral import DctPlan, dct_basis, dct_forward, dct_inverse, truncate, zero_pad


def direct_dct(x):
    # textbook double sum, independent of the basis-matrix helper
    L = len(x)
    out = np.zeros(L)
    for k in range(L):
        s = np.sqrt(1.0 / L) if k == 0 else np.sqrt(2.0 / L)
        out[k] = s * sum(x[n] * np.cos(np.pi * (2 * n + 1) * k / (2 * L)) for n in range(L))
    return out


@pytest.mark.parametrize("L", [1, 2, 3, 8, 31, 64])
def test_basis_orthonormal(L):
    B = dct_basis(L)
    assert np.abs(B.T @ B - np.eye(L)).max() < 1e-10


def test_constant_vector_maps_to_dc():
    L, c = 300, 2.5
    coeffs = dct_forward(np.full(L, c))
    assert coeffs[0] == pytest.approx(c * np.sqrt(L), rel=1e-12)
    assert np.abs(coeffs[1:]).max() < 1e-12
    e = np.zeros(L)
    e[0] = c * np.sqrt(L)
    assert np.allclose(dct_inverse(e), c, atol=1e-12)


def test_single_cosine_has_one_coefficient():
    L = 50
    n = np.arange(L)
    x = np.cos(np.pi * (2 * n + 1) * 3 / (2 * L))
    ref = direct_dct(x)
    c = dct_forward(x)
    assert np.allclose(c, ref, atol=1e-10)
    assert np.argmax(np.abs(c)) == 3
    assert np.abs(np.delete(c, 3)).max() < 1e-10


def test_fast_matches_direct_sum(rng):
    x = rng.standard_normal(40)
    assert np.allclose(dct_forward(x), direct_dct(x), atol=1e-10)


def test_inverse_matches_basis_transpose(rng):
    for L in (5, 17, 64):
        c = rng.standard_normal(L)
        assert np.allclose(dct_inverse(c), dct_basis(L).T @ c, atol=1e-10)


def test_plan_uses_same_convention(rng):
    plan = DctPlan(16)
    x = rng.standard_normal((3, 16))
    assert np.allclose(plan.forward(x), x @ plan.basis.T, atol=1e-12)
    assert np.allclose(plan.inverse(plan.forward(x)), x, atol=1e-12)


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        dct_forward(np.zeros(10), 12)
    with pytest.raises(LengthMismatch):
        dct_inverse(np.zeros(10), 12)


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(arrays(float, st.integers(1, 200), elements=finite))
def test_round_trip_and_parseval(x):
    c = dct_forward(x)
    scale = max(np.linalg.norm(x), 1e-300)
    assert np.linalg.norm(dct_inverse(c) - x) <= 1e-10 * scale + 1e-300
    assert abs(np.linalg.norm(c) - np.linalg.norm(x)) <= 1e-10 * scale + 1e-300


def test_truncate_and_pad():
    A = np.arange(12.0).reshape(3, 4)
    assert np.array_equal(truncate(A, 4), A)
    assert np.array_equal(truncate(A, 1), A[:, :1])
    assert np.array_equal(zero_pad(truncate(A, 4), 4), A)
    P = zero_pad(truncate(A, 2), 4)
    assert np.array_equal(P[:, :2], A[:, :2]) and not P[:, 2:].any()
    for m in (0, 5):
        with pytest.raises(BadCount):
            truncate(A, m)
    with pytest.raises(BadCount):
        zero_pad(A, 3)


@given(arrays(float, (4, 7), elements=finite), st.integers(1, 7))
def test_truncate_after_pad_is_identity(A, m):
    B = A[:, :m]
    assert np.array_equal(truncate(zero_pad(B, 7), m), B)
    assert np.all((zero_pad(truncate(A, m), 7) ** 2).sum(1) <= (A**2).sum(1) + 1e-9)


@settings(max_examples=30)
@given(arrays(float, 32, elements=finite))
def test_truncation_error_monotone(x):
    c = dct_forward(x)
    errs = [np.linalg.norm(dct_inverse(zero_pad(truncate(c, m), 32)[0]) - x) for m in range(1, 33)]
    assert all(b <= a + 1e-9 * (1 + np.linalg.norm(x)) for a, b in zip(errs, errs[1:]))
