"""Manufactured-solution test problems and error metrics.

Grids are uniform with ``n_intervals`` cells per dimension; unknowns live on
the ``n_intervals - 1`` interior nodes (homogeneous Dirichlet data).  Time
levels are ``t_k = k*T/n_time``, ``k = 1..n_time``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from rfdepint.allatonce import AllAtOnceOperator, TimeStencil, apply_allatonce, build_rhs
from rfdepint.discretization import jacobian_1d, jacobian_2d
from rfdepint.krylov import true_relative_residual

__all__ = ["ErrorMetrics", "Problem1D", "Problem2D", "build_system", "example1", "example2", "final_error"]


def _riesz_prefactor(gamma):
    return 1.0 / (2.0 * math.cos(0.5 * math.pi * gamma))


@dataclass(frozen=True)
class Problem1D:
    domain: tuple
    horizon: float
    gamma: float
    kappa: float
    phi: Callable
    source: Callable
    exact: Callable
    name: str = "example1"

    def mesh_width(self, n_intervals):
        a, b = self.domain
        return (b - a) / n_intervals

    def nodes(self, n_intervals):
        a, _ = self.domain
        return a + self.mesh_width(n_intervals) * np.arange(1, n_intervals)

    def jacobian(self, n_intervals):
        return jacobian_1d(self.gamma, self.kappa, self.mesh_width(n_intervals), n_intervals - 1)

    def sample(self, fn, t, n_intervals):
        return fn(self.nodes(n_intervals), t)


@dataclass(frozen=True)
class Problem2D:
    domain: tuple
    horizon: float
    gamma_x: float
    gamma_y: float
    kappa_x: float
    kappa_y: float
    phi: Callable
    source: Callable
    exact: Callable
    name: str = "example2"

    def mesh_width(self, n_intervals):
        a, b = self.domain
        return (b - a) / n_intervals

    def nodes(self, n_intervals):
        a, _ = self.domain
        return a + self.mesh_width(n_intervals) * np.arange(1, n_intervals)

    def jacobian(self, n_intervals):
        return jacobian_2d(
            self.gamma_x, self.gamma_y, self.kappa_x, self.kappa_y, self.mesh_width(n_intervals), n_intervals - 1
        )

    def sample(self, fn, t, n_intervals):
        x = self.nodes(n_intervals)
        X, Y = np.meshgrid(x, x, indexing="ij")
        return fn(X, Y, t).ravel()


def example1(gamma: float) -> Problem1D:
    """1D problem on (0, 1), T = 1, kappa = 0.01 with exact solution
    ``15 (1 + gamma/4) e^t x^3 (1-x)^3``."""
    if not (1.0 < gamma < 2.0):
        raise ValueError(f"gamma must lie in (1, 2), got {gamma}")
    kappa = 0.01
    c = 15.0 * (1.0 + gamma / 4.0)
    pre = c * kappa * _riesz_prefactor(gamma)
    # expansion of x^3 (1-x)^3 = x^3 - 3x^4 + 3x^5 - x^6
    terms = [(p, coef * math.gamma(p + 1) / math.gamma(p + 1 - gamma)) for p, coef in ((3, 1), (4, -3), (5, 3), (6, -1))]

    def exact(x, t):
        return c * np.exp(t) * x**3 * (1.0 - x) ** 3

    def phi(x):
        return exact(x, 0.0)

    def source(x, t):
        frac = sum(w * (x ** (p - gamma) + (1.0 - x) ** (p - gamma)) for p, w in terms)
        return exact(x, t) + pre * np.exp(t) * frac

    return Problem1D((0.0, 1.0), 1.0, float(gamma), kappa, phi, source, exact)


_Q = {5: 16.0, 6: -32.0, 7: 24.0, 8: -8.0, 9: 1.0}


def example2(gamma_x: float, gamma_y: float) -> Problem2D:
    """2D problem on (0, 2)^2, T = 2, kappa = 0.01 with exact solution
    ``e^{-t/3} x^4 (2-x)^4 y^4 (2-y)^4``.

    The y-direction fractional term of the source is evaluated in y.
    """
    for g in (gamma_x, gamma_y):
        if not (1.0 < g < 2.0):
            raise ValueError(f"fractional orders must lie in (1, 2), got {g}")
    kappa = 0.01

    def bump(z):
        return z**4 * (2.0 - z) ** 4

    def riesz_sum(z, g):
        return sum(q * math.gamma(l) / math.gamma(l - g) * (z ** (l - 1 - g) + (2.0 - z) ** (l - 1 - g)) for l, q in _Q.items())

    px = kappa * _riesz_prefactor(gamma_x)
    py = kappa * _riesz_prefactor(gamma_y)

    def exact(x, y, t):
        return np.exp(-t / 3.0) * bump(x) * bump(y)

    def phi(x, y):
        return exact(x, y, 0.0)

    def source(x, y, t):
        e = np.exp(-t / 3.0)
        return (
            -e / 3.0 * bump(x) * bump(y)
            + px * e * bump(y) * riesz_sum(x, gamma_x)
            + py * e * bump(x) * riesz_sum(y, gamma_y)
        )

    return Problem2D((0.0, 2.0), 2.0, float(gamma_x), float(gamma_y), kappa, kappa, phi, source, exact)


def build_system(problem, n_time: int, n_intervals: int):
    """All-at-once operator and right-hand side for ``problem``.

    Returns ``(op, F)`` with ``F`` flat and time-major.
    """
    if n_intervals < 3:
        raise ValueError(f"n_intervals must be >= 3, got {n_intervals}")
    dt = problem.horizon / n_time
    op = AllAtOnceOperator(TimeStencil(n_time), problem.jacobian(n_intervals), dt)
    u0 = problem.sample(lambda *a: problem.phi(*a[:-1]), 0.0, n_intervals)
    f = np.stack([problem.sample(problem.source, k * dt, n_intervals) for k in range(1, n_time + 1)])
    return op, build_rhs(op, u0, f)


def exact_solution(problem, n_time: int, n_intervals: int):
    """Exact solution sampled at every time level, flat and time-major."""
    dt = problem.horizon / n_time
    return np.concatenate([problem.sample(problem.exact, k * dt, n_intervals) for k in range(1, n_time + 1)])


@dataclass(frozen=True)
class ErrorMetrics:
    err_inf: float
    trr: float


def final_error(solution, problem, n_time: int, n_intervals: int, op=None, rhs=None) -> ErrorMetrics:
    """Max-norm error at ``t = T`` and log10 true relative residual."""
    solution = np.asarray(solution).ravel()
    ns = (n_intervals - 1) ** (2 if isinstance(problem, Problem2D) else 1)
    if solution.size != n_time * ns:
        raise ValueError(f"solution has {solution.size} entries, grid needs {n_time * ns}")
    u_star = problem.sample(problem.exact, problem.horizon, n_intervals)
    err = float(np.max(np.abs(u_star - solution[-ns:])))
    if op is None or rhs is None:
        op, rhs = build_system(problem, n_time, n_intervals)
    rel = true_relative_residual(lambda v: apply_allatonce(op, v), rhs, solution)
    trr = math.log10(rel) if rel > 0 else float("-inf")
    return ErrorMetrics(err, trr)
