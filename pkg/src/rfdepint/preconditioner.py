"""Block alpha-circulant parallel-in-time preconditioners.

``P_alpha = C_alpha (x) I_s - dt * I_t (x) A`` where ``C_alpha`` is the
Strang-type alpha-circulant built from the BDF2 coefficients.  With
``Lam = diag(alpha**(-(k-1)/n_time))`` and the unitary DFT ``F``,
``C_alpha = (Lam F^*) diag(lambda) (F Lam^{-1})``, so applying the inverse is

1. scale time block ``k`` by ``alpha**((k-1)/n_time)`` and DFT across time,
2. solve ``(lambda_n I - dt A) z_n = y_n`` for every frequency ``n``,
3. inverse DFT across time and undo the scaling.

Step 2 is where the time parallelism lives: the frequency solves are
independent.  For real input the frequencies pair up by complex conjugation,
so only ``n_time//2 + 1`` of them are solved.  ``A`` is replaced by its
tau-approximation (diagonalised by DST-I) unless an exact dense inner solve
is requested for small diagnostics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from rfdepint.allatonce import BDF2_COEFFS, AllAtOnceOperator, TimeStencil
from rfdepint.transforms import dft_unitary, shifted_denominators, sine_transform

__all__ = [
    "AlphaCirculantPlan",
    "PreconditionerKind",
    "alpha_eigenvalues",
    "apply_forward",
    "apply_inverse",
    "build_plan",
    "perturbation_rank",
]

IMAG_RESIDUE_RTOL = 1e-10
# warn once the scaling matrix condition number alpha**(-(n-1)/n) exceeds this
ALPHA_COND_WARN = 1e8
DENSE_LIMIT = 4096


class ImaginaryResidueError(ArithmeticError):
    """Preconditioner output of a real input has a non-negligible imaginary part."""


@dataclass(frozen=True)
class PreconditionerKind:
    """How alpha is chosen.

    ``generalized`` uses ``alpha = min(0.5, 0.5*dt)``, ``strang`` uses
    ``alpha = 1`` and ``custom`` a fixed value in ``(0, 1]``.
    """

    variant: str = "generalized"
    alpha: float | None = None

    def __post_init__(self):
        if self.variant not in ("generalized", "strang", "custom"):
            raise ValueError(f"unknown preconditioner variant {self.variant!r}")
        if self.variant == "custom":
            if self.alpha is None or not (0.0 < self.alpha <= 1.0):
                raise ValueError(f"custom alpha must lie in (0, 1], got {self.alpha}")

    @classmethod
    def generalized(cls):
        return cls("generalized")

    @classmethod
    def strang(cls):
        return cls("strang")

    @classmethod
    def custom(cls, alpha):
        return cls("custom", float(alpha))

    def resolve(self, dt: float) -> float:
        if self.variant == "generalized":
            return min(0.5, 0.5 * dt)
        if self.variant == "strang":
            return 1.0
        return float(self.alpha)


def alpha_eigenvalues(alpha, n_time, r=BDF2_COEFFS):
    """``lambda_n = sum_j r_j alpha**(j/n_time) theta**((n-1) j)``, n = 1..n_time."""
    theta = np.exp(2j * np.pi * np.arange(n_time) / n_time)
    eps = alpha ** (1.0 / n_time) * theta
    return r[0] + r[1] * eps + r[2] * eps**2


@dataclass(frozen=True)
class _ExactBasis:
    # eigenbasis of a dense symmetric Jacobian: A = W diag(sigma) W^T
    sigma: np.ndarray
    W: np.ndarray

    def forward(self, x, workers=None):
        return x @ self.W

    def inverse(self, x, workers=None):
        return x @ self.W.T


@dataclass(frozen=True)
class _TauBasis:
    sigma: np.ndarray
    grid_shape: tuple

    def forward(self, x, workers=None):
        return sine_transform(x, self.grid_shape, workers=workers)

    inverse = forward


@dataclass(frozen=True)
class AlphaCirculantPlan:
    """Everything needed to apply ``P_alpha^{-1}``."""

    alpha: float
    n_time: int
    dt: float
    lam: np.ndarray
    scaling: np.ndarray
    solve_set: np.ndarray
    basis: object = field(repr=False)
    denominators: np.ndarray = field(repr=False)
    margin: float = 0.0
    inner: str = "tau"

    @property
    def n_space(self) -> int:
        return self.basis.sigma.size

    @property
    def sigma(self) -> np.ndarray:
        return self.basis.sigma

    def mirror(self, n: int) -> int:
        """0-based index of the frequency conjugate to ``n``."""
        return (-n) % self.n_time

    def __call__(self, v, workers=None):
        return apply_inverse(self, v, workers=workers)


def build_plan(kind, n_time, dt, jacobian, inner="tau", tau_kind="natural") -> AlphaCirculantPlan:
    """Precompute the time eigenvalues, scalings and spatial spectrum.

    Parameters
    ----------
    kind : PreconditionerKind or float
        A bare float is taken as a custom alpha.
    inner : {"tau", "exact"}
        ``"exact"`` diagonalises the dense Jacobian (small sizes only) and
        reproduces ``P_alpha`` exactly; ``"tau"`` is the fast variant.
    tau_kind : {"natural", "first_column"}
        Which tau-approximation of the Jacobian the fast variant uses.  The
        natural projection ``A - H(A)`` is much closer to ``A`` for the
        slowly decaying fractional stencils and is the default.
    """
    if not isinstance(kind, PreconditionerKind):
        kind = PreconditionerKind.custom(kind)
    TimeStencil(n_time)  # validates n_time
    alpha = kind.resolve(dt)
    if alpha ** (-(n_time - 1) / n_time) > ALPHA_COND_WARN:
        warnings.warn(
            f"alpha={alpha:.3g} makes the time scaling ill-conditioned "
            f"(cond ~ {alpha ** (-(n_time - 1) / n_time):.2e}); expect roundoff amplification",
            RuntimeWarning,
            stacklevel=2,
        )
    if inner == "tau":
        tau = jacobian.tau(tau_kind)
        basis = _TauBasis(tau.sigma, tau.grid_shape)
    elif inner == "exact":
        if jacobian.size > DENSE_LIMIT:
            raise ValueError(f"exact inner solves need n_space <= {DENSE_LIMIT}, got {jacobian.size}")
        sigma, W = np.linalg.eigh(jacobian.dense())
        basis = _ExactBasis(sigma, W)
    else:
        raise ValueError(f"inner must be 'tau' or 'exact', got {inner!r}")

    lam = alpha_eigenvalues(alpha, n_time)
    k = np.arange(n_time)
    scaling = alpha ** (k / n_time)  # diagonal of Lam^{-1}
    den, margin = shifted_denominators(basis.sigma, lam, dt)
    return AlphaCirculantPlan(
        alpha=alpha,
        n_time=n_time,
        dt=float(dt),
        lam=lam,
        scaling=scaling,
        solve_set=np.arange(n_time // 2 + 1),
        basis=basis,
        denominators=den,
        margin=margin,
        inner=inner,
    )


def _blocks(plan, v):
    v = np.asarray(v)
    shape = (plan.n_time, plan.n_space)
    if v.shape == shape:
        return v
    if v.shape == (plan.n_time * plan.n_space,):
        return v.reshape(shape)
    raise ValueError(f"expected {plan.n_time * plan.n_space} entries in time-major order, got shape {v.shape}")


def apply_inverse(plan: AlphaCirculantPlan, v, half=True, workers=None):
    """``z = P_alpha^{-1} v`` by scaled DFT in time and shifted spatial solves.

    With ``half=True`` (and real ``v``) only the frequencies in
    ``plan.solve_set`` are solved; the rest follow by conjugation.
    """
    V = _blocks(plan, v)
    real_input = not np.iscomplexobj(V)
    nt = plan.n_time
    Z1 = dft_unitary(plan.scaling[:, None] * V, "forward", axis=0, workers=workers)

    if half and real_input:
        m = plan.solve_set.size
        Z2 = np.empty_like(Z1)
        Y = plan.basis.forward(Z1[:m], workers) / plan.denominators[:m]
        Z2[:m] = plan.basis.inverse(Y, workers)
        # frequencies n >= m pair with nt - n < m
        Z2[m:] = np.conj(Z2[1 : nt - m + 1][::-1])
    else:
        Y = plan.basis.forward(Z1, workers) / plan.denominators
        Z2 = plan.basis.inverse(Y, workers)

    Z = dft_unitary(Z2, "inverse", axis=0, workers=workers) / plan.scaling[:, None]
    if real_input:
        nz = np.linalg.norm(Z)
        resid = np.linalg.norm(Z.imag)
        if resid > IMAG_RESIDUE_RTOL * max(nz, np.finfo(float).tiny):
            raise ImaginaryResidueError(
                f"imaginary residue {resid:.3e} relative to {nz:.3e}; conjugate symmetry broken"
            )
        Z = Z.real
    return Z.reshape(np.shape(v))


def apply_forward(plan: AlphaCirculantPlan, z, workers=None):
    """``P_alpha z`` from the same spectral factors (inverse of :func:`apply_inverse`)."""
    Zb = _blocks(plan, z)
    real_input = not np.iscomplexobj(Zb)
    Z1 = dft_unitary(plan.scaling[:, None] * Zb, "forward", axis=0, workers=workers)
    Y = plan.basis.forward(Z1, workers) * plan.denominators
    Z2 = plan.basis.inverse(Y, workers)
    out = dft_unitary(Z2, "inverse", axis=0, workers=workers) / plan.scaling[:, None]
    if real_input:
        out = out.real
    return out.reshape(np.shape(z))


def perturbation_rank(plan: AlphaCirculantPlan, op: AllAtOnceOperator, rtol=1e-10) -> int:
    """Numerical rank of ``P_alpha^{-1} A - I`` with exact inner solves.

    Small instances only (``n_time * n_space <= 4096``).
    """
    n = op.n_time * op.n_space
    if n > DENSE_LIMIT:
        raise ValueError(f"perturbation_rank is limited to {DENSE_LIMIT} unknowns, got {n}")
    exact = plan
    if plan.inner != "exact":
        exact = build_plan(PreconditionerKind.custom(plan.alpha), op.n_time, op.dt, op.jacobian, inner="exact")
    A = op.dense()
    cols = [apply_inverse(exact, A[:, j]) for j in range(n)]
    L = np.column_stack(cols) - np.eye(n)
    s = np.linalg.svd(L, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def theorem_rank_candidates(op: AllAtOnceOperator) -> dict:
    """Both rank readings of the low-rank correction: ``2*n_space`` (what the
    Kronecker rank rule gives) and ``2*n_time``."""
    return {"2*n_space": 2 * op.n_space, "2*n_time": 2 * op.n_time}


def scaling_condition(alpha, n_time) -> float:
    return math.pow(alpha, -(n_time - 1) / n_time)
