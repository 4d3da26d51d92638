"""Preconditioned Krylov solvers with residual histories.

Both solvers start from the zero vector and stop once the relative
residual ``||r_k|| / ||r_0||`` drops below ``tol``.  Operators and
preconditioners are plain callables on flat real vectors.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SolveReport",
    "SolverConfig",
    "bicgstab_left",
    "bicgstab_right",
    "gmres_right",
    "solve",
    "true_relative_residual",
]


@dataclass(frozen=True)
class SolverConfig:
    """``side`` defaults to right for GMRES and left for BiCGSTAB."""

    tol: float = 1e-9
    max_iter: int = 200
    method: str = "gmres"
    side: str | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.method not in ("gmres", "bicgstab"):
            raise ValueError(f"method must be 'gmres' or 'bicgstab', got {self.method!r}")
        if self.side is None:
            object.__setattr__(self, "side", "right" if self.method == "gmres" else "left")
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        if self.method == "gmres" and self.side != "right":
            raise ValueError("only right-preconditioned GMRES is provided")


@dataclass
class SolveReport:
    """Outcome of one solve; one row of a benchmark table.

    ``iterations`` counts BiCGSTAB in half steps (e.g. 4.5).  ``trr`` is
    ``log10(||b - A x|| / ||b||)`` recomputed from the returned solution.
    """

    method: str
    iterations: float
    converged: bool
    trr: float = float("nan")
    wall_time: float = 0.0
    residual_history: list = field(default_factory=list)
    message: str = ""


def true_relative_residual(op, b, x) -> float:
    b = np.asarray(b)
    nb = np.linalg.norm(b)
    r = np.linalg.norm(b - op(x))
    return r / nb if nb > 0 else r


def _log10(x):
    return math.log10(x) if x > 0 else float("-inf")


def _identity(v):
    return v


def gmres_right(op, precond, b, config: SolverConfig | None = None):
    """Full GMRES on ``A M^{-1} y = b``, ``x = M^{-1} y``.

    Modified Gram-Schmidt Arnoldi and Givens rotations.  With right
    preconditioning the monitored residual is the true residual.

    Returns
    -------
    x : ndarray
    report : SolveReport
    """
    config = config or SolverConfig(method="gmres")
    M = precond or _identity
    b = np.asarray(b, dtype=float).ravel()
    t0 = time.perf_counter()
    beta = np.linalg.norm(b)
    if beta == 0.0:
        return np.zeros_like(b), SolveReport("gmres", 0, True, float("-inf"), 0.0, [], "zero right-hand side")

    m = config.max_iter
    H = np.zeros((m + 1, m))
    cs = np.zeros(m)
    sn = np.zeros(m)
    g = np.zeros(m + 1)
    g[0] = beta
    basis = [b / beta]
    history = []
    converged = False
    message = "max_iter reached"
    k = 0
    for k in range(m):
        w = op(M(basis[k]))
        for i in range(k + 1):
            H[i, k] = basis[i] @ w
            w -= H[i, k] * basis[i]
        h_next = np.linalg.norm(w)
        H[k + 1, k] = h_next
        breakdown = h_next <= 1e-14 * np.linalg.norm(H[: k + 2, k])

        for i in range(k):
            hi = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
            H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
            H[i, k] = hi
        denom = math.hypot(H[k, k], H[k + 1, k])
        cs[k] = H[k, k] / denom
        sn[k] = H[k + 1, k] / denom
        H[k, k] = denom
        H[k + 1, k] = 0.0
        g[k + 1] = -sn[k] * g[k]
        g[k] = cs[k] * g[k]

        rel = abs(g[k + 1]) / beta
        history.append(rel)
        if rel < config.tol:
            converged, message = True, "converged"
            break
        if breakdown:
            converged, message = True, "happy breakdown"
            break
        basis.append(w / h_next)

    kk = k + 1
    y = np.linalg.solve(np.triu(H[:kk, :kk]), g[:kk])
    x = M(np.column_stack(basis[:kk]) @ y)
    wall = time.perf_counter() - t0
    trr = _log10(true_relative_residual(op, b, x))
    return x, SolveReport("gmres", kk, converged, trr, wall, history, message)


def bicgstab_left(op, precond, b, config: SolverConfig | None = None):
    """BiCGSTAB on ``M^{-1} A x = M^{-1} b``.

    Convergence is checked at every half step on the unpreconditioned
    residual ``||b - A x|| / ||b||``, computed explicitly; iterations are
    reported in half steps.
    """
    config = config or SolverConfig(method="bicgstab")
    M = precond or _identity
    b = np.asarray(b, dtype=float).ravel()
    t0 = time.perf_counter()
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return np.zeros_like(b), SolveReport("bicgstab", 0, True, float("-inf"), 0.0, [], "zero right-hand side")

    def true_rel(x):
        return np.linalg.norm(b - op(x)) / nb

    x = np.zeros_like(b)
    r = M(b)
    r_hat = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    history = []
    message = "max_iter reached"
    converged = False
    iters = 0.0
    for i in range(1, config.max_iter + 1):
        rho_new = r_hat @ r
        if rho_new == 0.0:
            message = "breakdown: rho = 0"
            break
        if i == 1:
            p = r.copy()
        else:
            beta = (rho_new / rho) * (alpha / omega)
            p = r + beta * (p - omega * v)
        rho = rho_new
        v = M(op(p))
        denom = r_hat @ v
        if denom == 0.0:
            message = "breakdown: <r_hat, v> = 0"
            break
        alpha = rho / denom
        x_half = x + alpha * p
        s = r - alpha * v
        rel = true_rel(x_half)
        history.append(rel)
        iters = i - 0.5
        if rel < config.tol:
            x = x_half
            converged, message = True, "converged"
            break

        t = M(op(s))
        tt = t @ t
        if tt == 0.0:
            x = x_half
            message = "breakdown: preconditioned residual vanished"
            break
        omega = (t @ s) / tt
        x = x_half + omega * s
        r = s - omega * t
        rel = true_rel(x)
        history.append(rel)
        iters = float(i)
        if rel < config.tol:
            converged, message = True, "converged"
            break
        if omega == 0.0:
            message = "breakdown: omega = 0"
            break

    wall = time.perf_counter() - t0
    trr = _log10(true_relative_residual(op, b, x))
    return x, SolveReport("bicgstab", iters, converged, trr, wall, history, message)


def bicgstab_right(op, precond, b, config: SolverConfig | None = None):
    """Preconditioned BiCGSTAB with the preconditioner inside the recurrence.

    Equivalent to BiCGSTAB on ``A M^{-1} y = b``; the recurrence carries the
    unpreconditioned residual.  This is the form used by common built-in
    library implementations (e.g. MATLAB's ``bicgstab``).  Stopping and
    iteration counting follow :func:`bicgstab_left`.
    """
    config = config or SolverConfig(method="bicgstab", side="right")
    M = precond or _identity
    b = np.asarray(b, dtype=float).ravel()
    t0 = time.perf_counter()
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return np.zeros_like(b), SolveReport("bicgstab", 0, True, float("-inf"), 0.0, [], "zero right-hand side")

    x = np.zeros_like(b)
    r = b.copy()
    r_hat = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    history = []
    message = "max_iter reached"
    converged = False
    iters = 0.0
    for i in range(1, config.max_iter + 1):
        rho_new = r_hat @ r
        if rho_new == 0.0:
            message = "breakdown: rho = 0"
            break
        if i == 1:
            p = r.copy()
        else:
            p = r + (rho_new / rho) * (alpha / omega) * (p - omega * v)
        rho = rho_new
        p_hat = M(p)
        v = op(p_hat)
        denom = r_hat @ v
        if denom == 0.0:
            message = "breakdown: <r_hat, v> = 0"
            break
        alpha = rho / denom
        x_half = x + alpha * p_hat
        s = r - alpha * v
        rel = np.linalg.norm(b - op(x_half)) / nb
        history.append(rel)
        iters = i - 0.5
        if rel < config.tol:
            x = x_half
            converged, message = True, "converged"
            break

        s_hat = M(s)
        t = op(s_hat)
        tt = t @ t
        if tt == 0.0:
            x = x_half
            message = "breakdown: t = 0"
            break
        omega = (t @ s) / tt
        x = x_half + omega * s_hat
        r = s - omega * t
        rel = np.linalg.norm(b - op(x)) / nb
        history.append(rel)
        iters = float(i)
        if rel < config.tol:
            converged, message = True, "converged"
            break
        if omega == 0.0:
            message = "breakdown: omega = 0"
            break

    wall = time.perf_counter() - t0
    trr = _log10(true_relative_residual(op, b, x))
    return x, SolveReport("bicgstab", iters, converged, trr, wall, history, message)


def solve(op, precond, b, config: SolverConfig):
    """Dispatch on ``config.method`` and ``config.side``."""
    if config.method == "gmres":
        return gmres_right(op, precond, b, config)
    if config.side == "left":
        return bicgstab_left(op, precond, b, config)
    return bicgstab_right(op, precond, b, config)
