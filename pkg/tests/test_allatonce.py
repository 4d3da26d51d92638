import math

import numpy as np
import pytest

from conftest import dense_bdf2
from rfdepint.allatonce import (
    AllAtOnceOperator,
    TimeStencil,
    apply_allatonce,
    apply_time_stencil,
    build_rhs,
    condition_bound,
    operator_norm,
)
from rfdepint.discretization import jacobian_1d, jacobian_2d


class ZeroJacobian:
    def __init__(self, n):
        self.size = n

    def matvec(self, v, workers=None):
        return np.zeros_like(v)

    def dense(self):
        return np.zeros((self.size, self.size))


def test_time_stencil_dense():
    np.testing.assert_array_equal(TimeStencil(6).dense(), dense_bdf2(6))
    with pytest.raises(ValueError):
        TimeStencil(2)


def test_block_structure_with_zero_jacobian():
    op = AllAtOnceOperator(TimeStencil(3), ZeroJacobian(2), 0.1)
    I = np.eye(2)
    Z = np.zeros((2, 2))
    ref = np.block([[I, Z, Z], [-2 * I, 1.5 * I, Z], [0.5 * I, -2 * I, 1.5 * I]])
    np.testing.assert_array_equal(op.dense(), ref)


@pytest.mark.parametrize("nt,ns", [(3, 4), (7, 5), (16, 9)])
def test_matvec_matches_kronecker_1d(nt, ns, rng):
    J = jacobian_1d(1.5, 0.3, 1.0 / (ns + 1), ns)
    dt = 1.0 / nt
    op = AllAtOnceOperator(TimeStencil(nt), J, dt)
    ref = np.kron(dense_bdf2(nt), np.eye(ns)) - dt * np.kron(np.eye(nt), J.dense())
    for _ in range(5):
        u = rng.standard_normal(nt * ns)
        np.testing.assert_allclose(op(u), ref @ u, atol=1e-12 * np.abs(ref).sum(axis=1).max())
    U = u.reshape(nt, ns)
    np.testing.assert_allclose(apply_allatonce(op, U), (ref @ u).reshape(nt, ns), atol=1e-11)


def test_matvec_matches_kronecker_2d(rng):
    nt, n = 5, 4
    J = jacobian_2d(1.4, 1.2, 0.01, 0.01, 2.0 / (n + 1), n)
    op = AllAtOnceOperator(TimeStencil(nt), J, 0.4)
    ref = np.kron(dense_bdf2(nt), np.eye(n * n)) - 0.4 * np.kron(np.eye(nt), J.dense())
    u = rng.standard_normal(nt * n * n)
    np.testing.assert_allclose(op(u), ref @ u, atol=1e-12)


def test_shape_errors():
    op = AllAtOnceOperator(TimeStencil(4), ZeroJacobian(3), 0.1)
    assert op.shape == (12, 12)
    with pytest.raises(ValueError):
        op(np.ones(11))
    with pytest.raises(ValueError):
        apply_time_stencil(TimeStencil(4), np.ones((3, 3)))


def test_build_rhs_first_two_blocks():
    op = AllAtOnceOperator(TimeStencil(4), ZeroJacobian(2), 0.25)
    u0 = np.array([1.0, 2.0])
    f = np.arange(8.0).reshape(4, 2)
    F = build_rhs(op, u0, f).reshape(4, 2)
    np.testing.assert_allclose(F[0], 0.25 * f[0] + u0)
    np.testing.assert_allclose(F[1], 0.25 * f[1] - 0.5 * u0)
    np.testing.assert_allclose(F[2:], 0.25 * f[2:])


def test_operator_norm_indefinite():
    est, ok = operator_norm(lambda v: np.diag([1.0, -1.0]) @ v, 2)
    assert ok and est == pytest.approx(1.0)


def test_operator_norm_power_iteration():
    J = jacobian_1d(1.5, 1.0, 0.1, 9)
    est, ok = operator_norm(J.matvec, 9, rtol=1e-12, max_iter=5000)
    assert ok
    assert math.isclose(est, np.abs(np.linalg.eigvalsh(J.dense())).max(), rel_tol=1e-6)


def test_operator_norm_reports_nonconvergence(caplog):
    D = np.diag(np.linspace(0.5, 1.0, 50))
    est, ok = operator_norm(lambda v: D @ v, 50, rtol=1e-14, max_iter=3)
    assert not ok and est < 1.0
    assert "did not converge" in caplog.text


def test_condition_bound_dominates_dense():
    nt, ns = 8, 8
    J = jacobian_1d(1.5, 0.01, 1.0 / (ns + 1), ns)
    op = AllAtOnceOperator(TimeStencil(nt), J, 1.0 / nt)
    b = condition_bound(op, rtol=1e-10, max_iter=5000)
    s = np.linalg.svd(op.dense(), compute_uv=False)
    assert s[0] <= b["sigma_max_bound"] * (1 + 1e-8)
    assert s[-1] >= b["sigma_min_bound"]
    assert s[0] / s[-1] <= b["cond_bound"] * (1 + 1e-8)
