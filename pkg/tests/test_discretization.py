import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_toeplitz
from rfdepint.discretization import centred_weights, jacobian_1d, jacobian_2d


def gamma_formula(gamma, ell):
    """Closed form (-1)^l Gamma(g+1) / (Gamma(g/2-l+1) Gamma(g/2+l+1)) in mpmath."""
    mpmath.mp.dps = 40
    g = mpmath.mpf(gamma)
    val = (-1) ** ell * mpmath.gamma(g + 1) / (mpmath.gamma(g / 2 - ell + 1) * mpmath.gamma(g / 2 + ell + 1))
    return float(val)


@pytest.mark.parametrize("gamma", [1.1, 1.2, 1.5, 1.7, 1.9, 1.99])
def test_weights_match_gamma_closed_form(gamma):
    w = centred_weights(gamma, 60).weights
    ref = np.array([gamma_formula(gamma, l) for l in range(61)])
    np.testing.assert_allclose(w, ref, rtol=1e-12, atol=1e-300)


def test_gamma_two_gives_second_difference():
    w = centred_weights(2.0, 5).weights
    np.testing.assert_allclose(w, [2.0, -1.0, 0.0, 0.0, 0.0, 0.0], atol=1e-15)


@given(st.floats(min_value=1.01, max_value=1.99))
@settings(max_examples=50, deadline=None)
def test_weight_sign_pattern_and_decay(gamma):
    w = centred_weights(gamma, 200).weights
    assert w[0] > 0
    assert np.all(w[1:] < 0)
    assert np.all(np.abs(w[2:]) < np.abs(w[1:-1]))


@pytest.mark.parametrize("gamma", [1.2, 1.5, 1.9])
def test_symmetric_sum_positive_and_shrinking(gamma):
    sums = [centred_weights(gamma, n).symmetric_sum() for n in (10, 100, 1000, 10000)]
    assert all(s > 0 for s in sums)
    assert all(a > b for a, b in zip(sums, sums[1:]))
    # tail of |w_l| ~ l^{-1-g} gives a partial-sum gap ~ L^{-g}
    assert sums[-1] < 10.0 * 10000.0 ** (-gamma)


@pytest.mark.parametrize("bad", [1.0, 0.5, 2.5, float("nan")])
def test_weights_reject_bad_order(bad):
    with pytest.raises(ValueError):
        centred_weights(bad, 4)


def test_weights_reject_zero_count():
    with pytest.raises(ValueError):
        centred_weights(1.5, 0)


def test_jacobian_1d_dense_and_matvec(rng):
    h = 1.0 / 33
    J = jacobian_1d(1.5, 0.01, h, 32)
    w = centred_weights(1.5, 31).weights
    ref = -(0.01 / h**1.5) * dense_toeplitz(w)
    np.testing.assert_allclose(J.dense(), ref, rtol=1e-14)
    V = rng.standard_normal((3, 32))
    np.testing.assert_allclose(J.matvec(V), V @ ref.T, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


def test_jacobian_1d_negative_definite():
    J = jacobian_1d(1.3, 1.0, 0.05, 19)
    ev = np.linalg.eigvalsh(J.dense())
    assert ev.max() < 0


def test_jacobian_2d_matches_kronecker(rng):
    n, h = 7, 2.0 / 8
    J = jacobian_2d(1.4, 1.2, 0.01, 0.02, h, n)
    Tx = dense_toeplitz(centred_weights(1.4, n - 1).weights)
    Ty = dense_toeplitz(centred_weights(1.2, n - 1).weights)
    ref = -(0.01 / h**1.4 * np.kron(Tx, np.eye(n)) + 0.02 / h**1.2 * np.kron(np.eye(n), Ty))
    np.testing.assert_allclose(J.dense(), ref, rtol=1e-14)
    v = rng.standard_normal((2, n * n))
    np.testing.assert_allclose(J.matvec(v), v @ ref.T, rtol=1e-12, atol=1e-12)


def test_jacobian_2d_rejects_mismatched_vector():
    J = jacobian_2d(1.5, 1.5, 1.0, 1.0, 0.1, 5)
    with pytest.raises(ValueError):
        J.matvec(np.ones(24))


@pytest.mark.parametrize(
    "args",
    [(1.5, 0.01, 0.1, 1), (1.5, -1.0, 0.1, 5), (1.5, 0.01, 0.0, 5), (2.5, 0.01, 0.1, 5)],
)
def test_jacobian_1d_validation(args):
    with pytest.raises(ValueError):
        jacobian_1d(*args)


def test_scales():
    J = jacobian_2d(1.4, 1.2, 0.01, 0.01, 1 / 32, 31)
    assert math.isclose(J.scale_x, 0.01 * 32**1.4)
    assert math.isclose(J.scale_y, 0.01 * 32**1.2)
