"""BDF2 all-at-once space-time operator ``C (x) I_s - dt * I_t (x) A``.

Space-time vectors are stored time-major: a flat vector of length
``n_time * n_space`` whose block ``k`` is the solution at ``t_{k+1}``.
Every apply also accepts the ``(n_time, n_space)`` view.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "AllAtOnceOperator",
    "TimeStencil",
    "apply_allatonce",
    "apply_time_stencil",
    "build_rhs",
    "condition_bound",
    "operator_norm",
]

BDF2_COEFFS = (1.5, -2.0, 0.5)


@dataclass(frozen=True)
class TimeStencil:
    """Lower-triangular BDF2 matrix with a backward-Euler first row."""

    n_time: int
    r: tuple = BDF2_COEFFS

    def __post_init__(self):
        if self.n_time < 3:
            raise ValueError(f"n_time must be >= 3, got {self.n_time}")

    def dense(self) -> np.ndarray:
        r0, r1, r2 = self.r
        n = self.n_time
        C = r0 * np.eye(n) + r1 * np.eye(n, k=-1) + r2 * np.eye(n, k=-2)
        C[0, 0] = 1.0
        return C

    def dense_alpha(self, alpha: float) -> np.ndarray:
        """The alpha-circulant companion of :meth:`dense` (Strang type)."""
        r0, r1, r2 = self.r
        n = self.n_time
        C = r0 * np.eye(n) + r1 * np.eye(n, k=-1) + r2 * np.eye(n, k=-2)
        C[0, n - 1] = alpha * r1
        C[0, n - 2] = alpha * r2
        C[1, n - 1] = alpha * r2
        return C


def _as_blocks(u, n_time, n_space):
    u = np.asarray(u)
    if u.shape == (n_time, n_space):
        return u
    if u.shape == (n_time * n_space,):
        return u.reshape(n_time, n_space)
    raise ValueError(f"expected {n_time * n_space} entries in time-major order, got shape {u.shape}")


def apply_time_stencil(stencil: TimeStencil, V):
    """``(C (x) I_s) vec(V)`` for ``V`` of shape ``(n_time, n_space)``."""
    V = np.asarray(V)
    if V.ndim != 2 or V.shape[0] != stencil.n_time:
        raise ValueError(f"expected ({stencil.n_time}, n_space) blocks, got {V.shape}")
    r0, r1, r2 = stencil.r
    out = r0 * V
    out[1:] += r1 * V[:-1]
    out[2:] += r2 * V[:-2]
    out[0] = V[0]
    return out


@dataclass(frozen=True)
class AllAtOnceOperator:
    """Matrix-free ``C (x) I_s - dt * I_t (x) A``."""

    stencil: TimeStencil
    jacobian: object
    dt: float

    @property
    def n_time(self) -> int:
        return self.stencil.n_time

    @property
    def n_space(self) -> int:
        return self.jacobian.size

    @property
    def shape(self) -> tuple:
        n = self.n_time * self.n_space
        return (n, n)

    @property
    def dtype(self):
        return np.dtype(float)

    def matvec(self, u, workers=None):
        return apply_allatonce(self, u, workers=workers)

    __call__ = matvec

    def dense(self) -> np.ndarray:
        return np.kron(self.stencil.dense(), np.eye(self.n_space)) - self.dt * np.kron(
            np.eye(self.n_time), self.jacobian.dense()
        )


def apply_allatonce(op: AllAtOnceOperator, u, workers=None):
    """Apply the all-at-once operator; returns the same layout as ``u``."""
    U = _as_blocks(u, op.n_time, op.n_space)
    out = apply_time_stencil(op.stencil, U)
    out -= op.dt * op.jacobian.matvec(U, workers=workers)
    return out.reshape(np.shape(u))


def build_rhs(op: AllAtOnceOperator, u0, f_samples):
    """Right-hand side of the all-at-once system.

    Parameters
    ----------
    u0 : array, shape (n_space,)
        Initial condition on the interior nodes.
    f_samples : array, shape (n_time, n_space)
        Source term at ``t_1 .. t_{n_time}``.

    Returns
    -------
    array, shape (n_time * n_space,)
    """
    u0 = np.asarray(u0, dtype=float)
    F = op.dt * np.array(f_samples, dtype=float).reshape(op.n_time, op.n_space)
    F[0] += u0
    F[1] -= 0.5 * u0
    return F.ravel()


def operator_norm(matvec, n, rtol=1e-6, max_iter=500, seed=0):
    """Spectral norm of a symmetric operator by power iteration.

    Returns ``(estimate, converged)``.  The estimate ``||A x||`` for a unit
    ``x`` is a lower bound that increases towards the norm.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max_iter):
        y = matvec(x)
        new = float(np.linalg.norm(y))
        if new == 0.0:
            return 0.0, True
        x = y / new
        if abs(new - est) <= rtol * new:
            return new, True
        est = new
    log.warning("power iteration did not converge in %d steps; best estimate %.6e", max_iter, est)
    return est, False


def condition_bound(op: AllAtOnceOperator, rtol=1e-6, max_iter=500):
    """Singular-value and condition-number bounds for a negative
    semidefinite Jacobian.

    ``sigma_max <= 4 + dt*||A||``, ``sigma_min >= sqrt(6)/(3 n_time)`` and
    ``cond <= 2 sqrt(6) n_time + sqrt(6) T ||A|| / 2``.
    """
    norm_a, converged = operator_norm(op.jacobian.matvec, op.n_space, rtol=rtol, max_iter=max_iter)
    nt = op.n_time
    horizon = op.dt * nt
    s6 = math.sqrt(6.0)
    return {
        "sigma_max_bound": 4.0 + op.dt * norm_a,
        "sigma_min_bound": s6 / (3.0 * nt),
        "cond_bound": 2.0 * s6 * nt + s6 * horizon * norm_a / 2.0,
        "jacobian_norm": norm_a,
        "converged": converged,
    }
