import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_toeplitz, naive_dft, naive_dst1
from rfdepint.discretization import centred_weights
from rfdepint.transforms import (
    NearSingularShiftError,
    SymToeplitz,
    TauOperator,
    dft_unitary,
    dst1_orthonormal,
    hankel_correction_column,
    natural_tau_spectrum,
    shifted_denominators,
    sine_transform,
    tau_solve_shifted,
    tau_spectrum,
    tau_spectrum_2d,
    toeplitz_matvec,
)


@pytest.mark.parametrize("m", [1, 2, 3, 8, 17, 64])
def test_dft_matches_naive(m, rng):
    F = naive_dft(m)
    v = rng.standard_normal((m, 3)) + 1j * rng.standard_normal((m, 3))
    np.testing.assert_allclose(dft_unitary(v, "forward", axis=0), F @ v, atol=1e-12)
    np.testing.assert_allclose(dft_unitary(v, "inverse", axis=0), F.conj().T @ v, atol=1e-12)


def test_dft_rejects_direction():
    with pytest.raises(ValueError):
        dft_unitary(np.ones(4), "sideways")


@pytest.mark.parametrize("n", [1, 2, 5, 16, 31])
def test_dst_matches_naive_and_is_involutory(n, rng):
    Q = naive_dst1(n)
    v = rng.standard_normal(n)
    np.testing.assert_allclose(dst1_orthonormal(v), Q @ v, atol=1e-13)
    np.testing.assert_allclose(dst1_orthonormal(dst1_orthonormal(v)), v, atol=1e-13)


def test_sine_transform_2d_is_kronecker(rng):
    n = 6
    Q = naive_dst1(n)
    x = rng.standard_normal((2, n * n))
    np.testing.assert_allclose(sine_transform(x, (n, n)), x @ np.kron(Q, Q).T, atol=1e-13)


@given(st.integers(min_value=1, max_value=70), st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=60, deadline=None)
def test_toeplitz_matvec_matches_dense(n, seed):
    r = np.random.default_rng(seed)
    col = r.standard_normal(n)
    v = r.standard_normal(n)
    T = SymToeplitz(col)
    np.testing.assert_allclose(T.matvec(v), dense_toeplitz(col) @ v, atol=1e-11 * (1 + np.abs(col).sum() * np.abs(v).max()))


def test_toeplitz_complex_and_axis(rng):
    col = rng.standard_normal(9)
    T = SymToeplitz(col)
    D = dense_toeplitz(col)
    V = rng.standard_normal((9, 4)) + 1j * rng.standard_normal((9, 4))
    np.testing.assert_allclose(toeplitz_matvec(T, V, axis=0), D @ V, atol=1e-12)
    np.testing.assert_allclose(T.dense(), D)


def test_toeplitz_mismatch():
    with pytest.raises(ValueError):
        SymToeplitz(np.ones(4)).matvec(np.ones(5))
    with pytest.raises(ValueError):
        SymToeplitz(np.ones((2, 2)))


def test_tau_spectrum_matches_first_column_tau_matrix():
    n = 12
    c = centred_weights(1.5, n - 1).weights.copy()
    tau = tau_spectrum(SymToeplitz(c))
    D = tau.dense()
    np.testing.assert_allclose(D[:, 0], c, atol=1e-13)
    Q = naive_dst1(n)
    M = Q @ D @ Q
    np.testing.assert_allclose(M - np.diag(np.diag(M)), 0, atol=1e-13)


def test_natural_tau_is_toeplitz_minus_hankel():
    n = 10
    c = -centred_weights(1.7, n - 1).weights
    T = dense_toeplitz(c)
    # persymmetric Hankel: c[i+j+2] in the top-left, mirrored bottom-right
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i + j + 2 < n:
                H[i, j] = c[i + j + 2]
            elif i + j > n:
                H[i, j] = c[2 * n - i - j]
    tau = natural_tau_spectrum(SymToeplitz(c))
    np.testing.assert_allclose(tau.dense(), T - H, atol=1e-13)
    # membership in the algebra: diagonalised by DST-I
    Q = naive_dst1(n)
    M = Q @ (T - H) @ Q
    np.testing.assert_allclose(M, np.diag(tau.sigma), atol=1e-13)


def test_natural_tau_is_closer_than_first_column_tau():
    n = 64
    c = centred_weights(1.5, n - 1).weights
    T = dense_toeplitz(c)
    t = SymToeplitz(c)
    e_nat = np.linalg.norm(T - natural_tau_spectrum(t).dense())
    e_col = np.linalg.norm(T - tau_spectrum(t).dense())
    assert e_nat < e_col


def test_hankel_column():
    np.testing.assert_array_equal(hankel_correction_column([5.0, 4.0, 3.0, 2.0]), [3.0, 2.0, 0.0, 0.0])


def test_tau_spectrum_2d_kronecker_sum():
    n = 5
    a = TauOperator(np.arange(1.0, n + 1), (n,))
    b = TauOperator(np.arange(10.0, 10 + n), (n,))
    t2 = tau_spectrum_2d(a, b, 2.0, 3.0)
    ref = 2.0 * np.kron(a.dense(), np.eye(n)) + 3.0 * np.kron(np.eye(n), b.dense())
    np.testing.assert_allclose(t2.dense(), ref, atol=1e-12)
    with pytest.raises(ValueError):
        tau_spectrum_2d(a, TauOperator(np.ones(3), (3,)))


def test_tau_operator_shape_check():
    with pytest.raises(ValueError):
        TauOperator(np.ones(5), (2, 2))


def test_tau_solve_shifted(rng):
    n = 9
    tau = TauOperator(-np.linspace(1, 5, n), (n,))
    shift, dt = 1.5 + 0.3j, 0.1
    rhs = rng.standard_normal(n)
    x = tau_solve_shifted(tau, shift, dt, rhs)
    np.testing.assert_allclose((shift * np.eye(n) - dt * tau.dense()) @ x, rhs, atol=1e-12)
    with pytest.raises(ValueError):
        tau_solve_shifted(tau, shift, dt, np.ones(n + 1))


def test_near_singular_shift_detected():
    sigma = np.array([-1.0, 0.0, 2.0])
    with pytest.raises(NearSingularShiftError):
        shifted_denominators(sigma, [0.0], 1.0)
    den, margin = shifted_denominators(sigma, [1.5, 2.0j], 0.1)
    assert den.shape == (2, 3) and margin > 0.1
