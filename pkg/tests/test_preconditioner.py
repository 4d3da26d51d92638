import warnings

import numpy as np
import pytest

from conftest import dense_alpha_circulant
from rfdepint.allatonce import AllAtOnceOperator, TimeStencil
from rfdepint.discretization import jacobian_1d, jacobian_2d
from rfdepint.preconditioner import (
    ImaginaryResidueError,
    PreconditionerKind,
    alpha_eigenvalues,
    apply_forward,
    apply_inverse,
    build_plan,
    perturbation_rank,
)
from rfdepint.transforms import NearSingularShiftError


def dense_preconditioner(nt, alpha, dt, Adense):
    ns = Adense.shape[0]
    return np.kron(dense_alpha_circulant(nt, alpha), np.eye(ns)) - dt * np.kron(np.eye(nt), Adense)


def test_kind_resolution():
    assert PreconditionerKind.generalized().resolve(1 / 64) == pytest.approx(1 / 128)
    assert PreconditionerKind.generalized().resolve(4.0) == 0.5
    assert PreconditionerKind.strang().resolve(0.1) == 1.0
    assert PreconditionerKind.custom(0.3).resolve(0.1) == 0.3
    for bad in (0.0, -1.0, 1.5):
        with pytest.raises(ValueError):
            PreconditionerKind.custom(bad)
    with pytest.raises(ValueError):
        PreconditionerKind("other")


@pytest.mark.parametrize("nt", [3, 4, 7, 16])
@pytest.mark.parametrize("alpha", [0.01, 0.3, 1.0])
def test_eigenvalues_of_alpha_circulant(nt, alpha):
    ev = np.linalg.eigvals(dense_alpha_circulant(nt, alpha))
    lam = alpha_eigenvalues(alpha, nt)
    # match as multisets
    for z in lam:
        assert np.min(np.abs(ev - z)) < 1e-10


def test_stencil_dense_alpha_agrees_with_oracle():
    np.testing.assert_array_equal(TimeStencil(7).dense_alpha(0.3), dense_alpha_circulant(7, 0.3))


@pytest.mark.parametrize("nt,ns,alpha", [(4, 5, 0.5), (7, 6, 0.05), (8, 3, 1.0), (5, 8, 0.9)])
def test_tau_inverse_matches_dense(nt, ns, alpha, rng):
    J = jacobian_1d(1.5, 0.2, 1.0 / (ns + 1), ns)
    dt = 1.0 / nt
    plan = build_plan(alpha, nt, dt, J)
    P = dense_preconditioner(nt, alpha, dt, J.tau().dense())
    v = rng.standard_normal(nt * ns)
    np.testing.assert_allclose(P @ apply_inverse(plan, v), v, atol=1e-11)
    np.testing.assert_allclose(apply_forward(plan, v), P @ v, atol=1e-11)


def test_exact_inner_matches_dense(rng):
    nt, ns, alpha = 6, 7, 0.2
    J = jacobian_1d(1.3, 1.0, 1.0 / (ns + 1), ns)
    plan = build_plan(alpha, nt, 1 / nt, J, inner="exact")
    P = dense_preconditioner(nt, alpha, 1 / nt, J.dense())
    v = rng.standard_normal(nt * ns)
    np.testing.assert_allclose(P @ plan(v), v, atol=1e-11)


def test_2d_tau_inverse_matches_dense(rng):
    nt, n = 4, 4
    J = jacobian_2d(1.4, 1.2, 0.01, 0.01, 2 / (n + 1), n)
    plan = build_plan(PreconditionerKind.generalized(), nt, 0.5, J)
    P = dense_preconditioner(nt, plan.alpha, 0.5, J.tau().dense())
    v = rng.standard_normal(nt * n * n)
    np.testing.assert_allclose(P @ plan(v), v, atol=1e-11)


@pytest.mark.parametrize("nt", [3, 4, 5, 8, 9])
def test_half_solve_equals_full(nt, rng):
    J = jacobian_1d(1.7, 0.5, 0.1, 9)
    plan = build_plan(0.4, nt, 0.1, J)
    v = rng.standard_normal((nt, 9))
    np.testing.assert_allclose(apply_inverse(plan, v, half=True), apply_inverse(plan, v, half=False), atol=1e-13)
    assert plan.solve_set.size == nt // 2 + 1
    assert all(plan.mirror(plan.mirror(k)) == k for k in range(nt))


def test_complex_input_uses_full_path(rng):
    J = jacobian_1d(1.5, 1.0, 0.1, 6)
    plan = build_plan(0.5, 4, 0.25, J)
    v = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    z = apply_inverse(plan, v)
    np.testing.assert_allclose(z, apply_inverse(plan, v.real) + 1j * apply_inverse(plan, v.imag), atol=1e-13)


def test_imaginary_residue_is_detected():
    J = jacobian_1d(1.5, 1.0, 0.1, 4)
    plan = build_plan(0.5, 4, 0.25, J)
    # break conjugate symmetry of the denominators on purpose
    plan.denominators[1] *= 1.5
    with pytest.raises(ImaginaryResidueError):
        apply_inverse(plan, np.ones(16), half=False)


def test_bad_shapes_and_inner():
    J = jacobian_1d(1.5, 1.0, 0.1, 4)
    plan = build_plan(0.5, 4, 0.25, J)
    with pytest.raises(ValueError):
        plan(np.ones(15))
    with pytest.raises(ValueError):
        build_plan(0.5, 4, 0.25, J, inner="lu")


def test_tiny_alpha_warns():
    J = jacobian_1d(1.5, 1.0, 0.1, 4)
    with pytest.warns(RuntimeWarning, match="ill-conditioned"):
        build_plan(1e-12, 8, 0.25, J)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        build_plan(0.5, 8, 0.25, J)


@pytest.mark.parametrize("nt,ns", [(4, 4), (6, 3), (3, 7)])
def test_perturbation_rank_is_twice_space_dimension(nt, ns):
    J = jacobian_1d(1.5, 0.01, 1.0 / (ns + 1), ns)
    op = AllAtOnceOperator(TimeStencil(nt), J, 1.0 / nt)
    plan = build_plan(0.5, nt, op.dt, J)
    assert perturbation_rank(plan, op) == 2 * ns


class ZeroJacobian:
    def __init__(self, n):
        self.size = n

    def dense(self):
        return np.zeros((self.size, self.size))


@pytest.mark.parametrize("alpha", [0.5, 0.9])
def test_perturbation_rank_zero_jacobian(alpha):
    nt, ns = 8, 5
    J = ZeroJacobian(ns)
    op = AllAtOnceOperator(TimeStencil(nt), J, 1.0 / nt)
    plan = build_plan(alpha, nt, op.dt, J, inner="exact")
    # (C - C_alpha) has two nonzero rows for every alpha
    ref = np.linalg.matrix_rank(np.kron(dense_alpha_circulant(nt, alpha) - TimeStencil(nt).dense(), np.eye(ns)))
    assert perturbation_rank(plan, op) == ref == 2 * ns


def test_strang_with_zero_jacobian_is_singular():
    # lambda_1 = 0 at alpha = 1, so P_1 has no inverse when A = 0
    J = ZeroJacobian(5)
    with pytest.raises(NearSingularShiftError):
        build_plan(1.0, 8, 0.125, J, inner="exact")
