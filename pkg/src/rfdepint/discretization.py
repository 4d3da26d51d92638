"""Fractional centred difference weights and the Riesz spatial Jacobians."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from rfdepint.transforms import SymToeplitz, TauOperator, natural_tau_spectrum, tau_spectrum, tau_spectrum_2d

TAU_KINDS = {"natural": natural_tau_spectrum, "first_column": tau_spectrum}

__all__ = [
    "FracWeights",
    "RieszJacobian1D",
    "RieszJacobian2D",
    "centred_weights",
    "jacobian_1d",
    "jacobian_2d",
]


@dataclass(frozen=True)
class FracWeights:
    """Weights ``w_0 .. w_L`` of the fractional centred difference.

    Only the non-negative half is stored; ``w_{-l} = w_l``.
    """

    gamma: float
    weights: np.ndarray

    @property
    def count(self) -> int:
        return self.weights.size - 1

    def symmetric_sum(self) -> float:
        """``w_0 + 2*sum_{l>=1} w_l``, which tends to 0+ as L grows."""
        return float(self.weights[0] + 2.0 * self.weights[1:].sum())


def _check_gamma(gamma):
    if not (1.0 < gamma <= 2.0):
        raise ValueError(f"fractional order must lie in (1, 2], got {gamma}")


def centred_weights(gamma: float, count: int) -> FracWeights:
    """Weights via the stable multiplicative recurrence.

    ``w_0 = Gamma(1+g) / Gamma(1+g/2)**2`` and
    ``w_{l+1} = w_l * (l - g/2) / (l + 1 + g/2)``.
    """
    gamma = float(gamma)
    _check_gamma(gamma)
    if count < 1:
        raise ValueError(f"weight count must be >= 1, got {count}")
    half = 0.5 * gamma
    w = np.empty(count + 1)
    w[0] = math.gamma(1.0 + gamma) / math.gamma(1.0 + half) ** 2
    ell = np.arange(count, dtype=float)
    w[1:] = w[0] * np.cumprod((ell - half) / (ell + 1.0 + half))
    w.setflags(write=False)
    return FracWeights(gamma, w)


@dataclass(frozen=True)
class RieszJacobian1D:
    """``A = -(kappa/h**gamma) T_x`` on the ``n_space`` interior nodes."""

    gamma: float
    kappa: float
    h: float
    n_space: int
    first_column: np.ndarray = field(repr=False)

    @cached_property
    def toeplitz(self) -> SymToeplitz:
        return SymToeplitz(self.first_column)

    @property
    def grid_shape(self) -> tuple:
        return (self.n_space,)

    @property
    def size(self) -> int:
        return self.n_space

    def matvec(self, v, workers=None):
        """Apply ``A`` along the trailing axis (leading axes are batches)."""
        return self.toeplitz.matvec(v, axis=-1, workers=workers)

    def dense(self) -> np.ndarray:
        return self.toeplitz.dense()

    def tau(self, kind="natural") -> TauOperator:
        """tau-approximation of ``A`` itself (negative spectrum).

        ``kind="natural"`` is ``A - H(A)``; ``"first_column"`` is the
        tau-matrix sharing ``A``'s first column.
        """
        return TAU_KINDS[kind](self.toeplitz)


@dataclass(frozen=True)
class RieszJacobian2D:
    """``A = -[(kx/h**gx) T_x (x) I + I (x) (ky/h**gy) T_y]``.

    Vectors are flattened row-major over an ``(n, n)`` grid with the
    x-index outer, so ``T_x`` acts along axis -2 of the grid view.
    """

    gamma_x: float
    gamma_y: float
    kappa_x: float
    kappa_y: float
    h: float
    n_per_dim: int
    first_col_x: np.ndarray = field(repr=False)
    first_col_y: np.ndarray = field(repr=False)

    @property
    def scale_x(self) -> float:
        return self.kappa_x / self.h**self.gamma_x

    @property
    def scale_y(self) -> float:
        return self.kappa_y / self.h**self.gamma_y

    @cached_property
    def _tx(self) -> SymToeplitz:
        return SymToeplitz(self.first_col_x)

    @cached_property
    def _ty(self) -> SymToeplitz:
        return SymToeplitz(self.first_col_y)

    @property
    def grid_shape(self) -> tuple:
        return (self.n_per_dim, self.n_per_dim)

    @property
    def size(self) -> int:
        return self.n_per_dim**2

    def matvec(self, v, workers=None):
        v = np.asarray(v)
        n = self.n_per_dim
        if v.shape[-1] != n * n:
            raise ValueError(f"dimension mismatch: operator is {n * n}, vector is {v.shape[-1]}")
        g = v.reshape(v.shape[:-1] + (n, n))
        out = self.scale_x * self._tx.matvec(g, axis=-2, workers=workers)
        out += self.scale_y * self._ty.matvec(g, axis=-1, workers=workers)
        return -out.reshape(v.shape)

    def dense(self) -> np.ndarray:
        eye = np.eye(self.n_per_dim)
        return -(self.scale_x * np.kron(self._tx.dense(), eye) + self.scale_y * np.kron(eye, self._ty.dense()))

    def tau(self, kind="natural") -> TauOperator:
        fn = TAU_KINDS[kind]
        return tau_spectrum_2d(fn(self._tx), fn(self._ty), -self.scale_x, -self.scale_y)


def jacobian_1d(gamma, kappa, h, n_space) -> RieszJacobian1D:
    if n_space < 2:
        raise ValueError(f"n_space must be >= 2, got {n_space}")
    if kappa <= 0 or h <= 0:
        raise ValueError("kappa and h must be positive")
    w = centred_weights(gamma, n_space - 1).weights
    col = -(kappa / h**gamma) * w
    col.setflags(write=False)
    return RieszJacobian1D(float(gamma), float(kappa), float(h), int(n_space), col)


def jacobian_2d(gamma_x, gamma_y, kappa_x, kappa_y, h, n_per_dim) -> RieszJacobian2D:
    """2D Jacobian on a square grid; the generator columns hold the bare
    weights of ``T_x`` and ``T_y`` (scales are applied on the fly)."""
    if n_per_dim < 2:
        raise ValueError(f"n_per_dim must be >= 2, got {n_per_dim}")
    if kappa_x <= 0 or kappa_y <= 0 or h <= 0:
        raise ValueError("kappa and h must be positive")
    wx = centred_weights(gamma_x, n_per_dim - 1).weights
    wy = centred_weights(gamma_y, n_per_dim - 1).weights
    return RieszJacobian2D(
        float(gamma_x), float(gamma_y), float(kappa_x), float(kappa_y), float(h), int(n_per_dim), wx, wy
    )
