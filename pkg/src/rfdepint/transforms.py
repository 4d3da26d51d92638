"""Fast transform kernels and structured-matrix algebra.

Conventions
-----------
* ``dft_unitary(v, "forward")`` applies the unitary Fourier matrix whose
  ``(j, k)`` entry is ``theta**(j*k) / sqrt(m)`` with ``theta = exp(+2*pi*i/m)``.
  That is the *positive* exponent, so it maps onto ``scipy.fft.ifft`` with
  orthonormal scaling.
* ``dst1_orthonormal`` applies ``Q[i, j] = sqrt(2/(n+1)) sin(pi*i*j/(n+1))``,
  ``1 <= i, j <= n``.  ``Q`` is symmetric and orthogonal, hence involutory.
* tau-matrices are ``Q diag(sigma) Q``; for Kronecker-sum operators the
  spectrum is stored flattened in row-major (x outer, y inner) order and the
  transform is applied along every grid axis.

All array functions act on the trailing axis (or trailing grid axes) and
broadcast over leading batch axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

__all__ = [
    "NearSingularShiftError",
    "SymToeplitz",
    "TauOperator",
    "dft_unitary",
    "dst1_orthonormal",
    "hankel_correction_column",
    "natural_tau_spectrum",
    "shifted_denominators",
    "sine_transform",
    "toeplitz_matvec",
    "tau_spectrum",
    "tau_spectrum_2d",
    "tau_solve_shifted",
]

# relative threshold below which a shifted diagonal entry counts as singular
SINGULAR_SHIFT_RTOL = 1e-14


class NearSingularShiftError(ArithmeticError):
    """A shifted system ``shift*I - dt*T`` is numerically singular."""


def dft_unitary(v, direction="forward", axis=-1, workers=None):
    """Unitary DFT with the ``exp(+2 pi i / m)`` kernel.

    Parameters
    ----------
    v : array_like
        Input, transformed along ``axis``.
    direction : {"forward", "inverse"}
        ``"forward"`` applies F, ``"inverse"`` applies F^* (= F^{-1}).
    """
    if direction == "forward":
        return sfft.ifft(v, axis=axis, norm="ortho", workers=workers)
    if direction == "inverse":
        return sfft.fft(v, axis=axis, norm="ortho", workers=workers)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def dst1_orthonormal(v, axis=-1, workers=None):
    """Orthonormal DST-I along ``axis``; its own inverse."""
    return sfft.dst(v, type=1, axis=axis, norm="ortho", workers=workers)


def sine_transform(x, grid_shape, workers=None):
    """Apply the tensor DST-I over the trailing flattened grid of ``x``.

    ``x`` has shape ``(..., prod(grid_shape))``.
    """
    x = np.asarray(x)
    lead = x.shape[:-1]
    xg = x.reshape(lead + tuple(grid_shape))
    axes = tuple(range(-len(grid_shape), 0))
    out = sfft.dstn(xg, type=1, axes=axes, norm="ortho", workers=workers)
    return out.reshape(x.shape)


def _embedding_size(n):
    # next power of two >= 2n; any size >= 2n-1 is correct
    return 1 << max(1, (2 * n - 1).bit_length())


@dataclass(frozen=True)
class SymToeplitz:
    """Symmetric Toeplitz matrix stored by its first column.

    The spectrum of the length-``m`` circulant embedding is precomputed, so
    repeated products cost two FFTs each.
    """

    first_column: np.ndarray
    _embed_size: int = field(init=False, repr=False)
    _embed_fft: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        c = np.asarray(self.first_column, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("first_column must be a non-empty 1D array")
        c = c.copy()
        c.setflags(write=False)
        n = c.size
        m = _embedding_size(n)
        circ = np.zeros(m)
        circ[:n] = c
        if n > 1:
            circ[m - n + 1 :] = c[1:][::-1]
        object.__setattr__(self, "first_column", c)
        object.__setattr__(self, "_embed_size", m)
        object.__setattr__(self, "_embed_fft", sfft.rfft(circ))

    @property
    def n(self) -> int:
        return self.first_column.size

    def dense(self) -> np.ndarray:
        idx = np.arange(self.n)
        return self.first_column[np.abs(idx[:, None] - idx[None, :])]

    def matvec(self, v, axis=-1, workers=None):
        return toeplitz_matvec(self, v, axis=axis, workers=workers)


def toeplitz_matvec(t: SymToeplitz, v, axis=-1, workers=None):
    """``T @ v`` along ``axis`` via circulant embedding, O(n log n).

    Real input stays real; complex input is split into real and imaginary
    parts, which keeps every transform a real FFT.
    """
    v = np.asarray(v)
    if v.shape[axis] != t.n:
        raise ValueError(f"dimension mismatch: operator is {t.n}, vector axis is {v.shape[axis]}")
    if np.iscomplexobj(v):
        return toeplitz_matvec(t, v.real, axis, workers) + 1j * toeplitz_matvec(t, v.imag, axis, workers)
    v = np.moveaxis(v, axis, -1)
    spec = sfft.rfft(v, n=t._embed_size, axis=-1, workers=workers)
    out = sfft.irfft(spec * t._embed_fft, n=t._embed_size, axis=-1, workers=workers)[..., : t.n]
    return np.moveaxis(out, -1, axis)


@dataclass(frozen=True)
class TauOperator:
    """tau-algebra operator ``Q diag(sigma) Q`` on a (possibly tensor) grid."""

    sigma: np.ndarray
    grid_shape: tuple

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float).ravel().copy()
        s.setflags(write=False)
        shape = tuple(int(g) for g in self.grid_shape)
        if int(np.prod(shape)) != s.size:
            raise ValueError("sigma length does not match grid_shape")
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "grid_shape", shape)

    @property
    def n(self) -> int:
        return self.sigma.size

    def transform(self, x, workers=None):
        return sine_transform(x, self.grid_shape, workers=workers)

    def matvec(self, x, workers=None):
        return self.transform(self.sigma * self.transform(x, workers), workers)

    def dense(self) -> np.ndarray:
        Q = self.transform(np.eye(self.n))
        return Q @ (self.sigma[:, None] * Q)


def tau_spectrum(t: SymToeplitz) -> TauOperator:
    """Spectrum of the tau-matrix sharing ``t``'s first column.

    ``sigma_i = sum_l a_l sin(pi i l/(n+1)) / sin(pi i/(n+1))``, evaluated as
    the ratio of the DST-I of the first column to the DST-I of ``e_1`` (the
    common normalisation cancels).
    """
    n = t.n
    e1 = np.zeros(n)
    e1[0] = 1.0
    sigma = dst1_orthonormal(t.first_column) / dst1_orthonormal(e1)
    return TauOperator(sigma, (n,))


def hankel_correction_column(c):
    """First column ``t_2 .. t_{n-1}, 0, 0`` of the Hankel part ``H(T)``.

    ``H(T)`` is persymmetric: ``t_{i+j+2}`` above the anti-diagonal band and
    the mirror image below it.
    """
    c = np.asarray(c, dtype=float)
    h = np.zeros_like(c)
    h[: c.size - 2] = c[2:]
    return h


def natural_tau_spectrum(t: SymToeplitz) -> TauOperator:
    """Spectrum of the natural tau projection ``tau(T) = T - H(T)``.

    ``H(T)`` is the persymmetric Hankel matrix of
    :func:`hankel_correction_column`; ``T - H(T)`` lies in the algebra diagonalised by DST-I and is
    the Frobenius-optimal approximation there.  Its first column is
    ``t_l - t_{l+2}``.
    """
    col = t.first_column - hankel_correction_column(t.first_column)
    return tau_spectrum(SymToeplitz(col))


def tau_spectrum_2d(jx: TauOperator, jy: TauOperator, scale_x=1.0, scale_y=1.0) -> TauOperator:
    """Kronecker-sum spectrum ``scale_x*sigma_x[i] + scale_y*sigma_y[j]``."""
    if len(jx.grid_shape) != 1 or len(jy.grid_shape) != 1:
        raise ValueError("tau_spectrum_2d expects one-dimensional factors")
    if jx.n != jy.n:
        raise ValueError(f"dimension mismatch: {jx.n} != {jy.n}")
    sigma = scale_x * jx.sigma[:, None] + scale_y * jy.sigma[None, :]
    return TauOperator(sigma.ravel(), (jx.n, jy.n))


def shifted_denominators(sigma, shifts, dt):
    """``shift - dt*sigma`` for each shift (rows), checked for singularity.

    Returns the array of denominators and the smallest relative margin
    ``min |shift - dt sigma| / (|shift| + dt max|sigma|)``.
    """
    shifts = np.atleast_1d(np.asarray(shifts, dtype=complex))
    sigma = np.asarray(sigma, dtype=float)
    den = shifts[:, None] - dt * sigma[None, :]
    scale = np.abs(shifts) + dt * np.max(np.abs(sigma))
    scale = np.where(scale > 0, scale, 1.0)
    margin = np.min(np.abs(den), axis=1) / scale
    worst = float(np.min(margin))
    if worst < SINGULAR_SHIFT_RTOL:
        k = int(np.argmin(margin))
        raise NearSingularShiftError(
            f"shifted system with shift {shifts[k]:.6g} is numerically singular "
            f"(relative margin {worst:.3e})"
        )
    return den, worst


def tau_solve_shifted(tau: TauOperator, shift, dt, rhs, workers=None):
    """Solve ``(shift*I - dt*T) x = rhs`` for the tau-operator ``T``.

    ``rhs`` may carry leading batch axes; its trailing axis has length
    ``tau.n``.
    """
    rhs = np.asarray(rhs)
    if rhs.shape[-1] != tau.n:
        raise ValueError(f"dimension mismatch: operator is {tau.n}, rhs is {rhs.shape[-1]}")
    den, _ = shifted_denominators(tau.sigma, shift, dt)
    y = tau.transform(rhs, workers) / den[0]
    return tau.transform(y, workers)
