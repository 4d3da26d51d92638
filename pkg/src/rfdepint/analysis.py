"""Dense small-instance diagnostics: spectra, norms and bound checks."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from rfdepint.allatonce import AllAtOnceOperator
from rfdepint.preconditioner import DENSE_LIMIT, AlphaCirculantPlan, PreconditionerKind, alpha_eigenvalues, build_plan

__all__ = [
    "CLUSTER_RADIUS",
    "SizeLimitError",
    "SpectrumReport",
    "c_inverse_col_sum",
    "lambda_scatter",
    "materialize",
    "preconditioned_spectrum",
    "verify_bounds",
    "write_spectrum_csv",
]

CLUSTER_RADIUS = 1e-2


class SizeLimitError(ValueError):
    """Requested dense diagnostic exceeds the size cap."""


def materialize(apply, n, limit=DENSE_LIMIT) -> np.ndarray:
    """Dense matrix of a linear map by applying it to each unit vector."""
    if n > limit:
        raise SizeLimitError(f"cannot materialize a {n}x{n} operator (limit {limit})")
    cols = []
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        cols.append(np.asarray(apply(e.copy())).ravel())
        e[j] = 0.0
    return np.column_stack(cols)


def lambda_scatter(alpha, n_time) -> np.ndarray:
    """Eigenvalues of the alpha-circulant time matrix, for plotting."""
    if n_time < 3:
        raise ValueError(f"n_time must be >= 3, got {n_time}")
    return alpha_eigenvalues(alpha, n_time)


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    cluster_fraction: float
    description: str = ""
    radius: float = CLUSTER_RADIUS

    def count_within(self, radius) -> int:
        return int(np.sum(np.abs(self.eigenvalues - 1.0) <= radius))


def _report(eigs, description, radius):
    eigs = np.asarray(eigs, dtype=complex)
    frac = float(np.mean(np.abs(eigs - 1.0) <= radius)) if eigs.size else 0.0
    return SpectrumReport(eigs, frac, description, radius)


def preconditioned_spectrum(op: AllAtOnceOperator, plan, exact_inner=False, radius=CLUSTER_RADIUS, description=""):
    """Eigenvalues of ``P^{-1} A`` by a dense nonsymmetric eigensolve.

    Parameters
    ----------
    plan : AlphaCirculantPlan or callable
        Preconditioner; any callable ``v -> P^{-1} v`` is accepted.
    exact_inner : bool
        Rebuild an alpha-circulant ``plan`` with exact dense inner solves.
    """
    n = op.n_time * op.n_space
    if n > DENSE_LIMIT:
        raise SizeLimitError(f"dense spectrum limited to {DENSE_LIMIT} unknowns, got {n}")
    if exact_inner and isinstance(plan, AlphaCirculantPlan) and plan.inner != "exact":
        plan = build_plan(PreconditionerKind.custom(plan.alpha), op.n_time, op.dt, op.jacobian, inner="exact")
    A = op.dense()
    PA = np.column_stack([np.asarray(plan(A[:, j])).ravel() for j in range(n)])
    if not description:
        alpha = getattr(plan, "alpha", None)
        inner = getattr(plan, "inner", "custom")
        description = f"n_time={op.n_time} n_space={op.n_space} dt={op.dt:.6g} alpha={alpha} inner={inner}"
    return _report(np.linalg.eigvals(PA), description, radius)


def c_inverse_col_sum(n_time) -> float:
    """Closed form of the largest absolute column sum of ``C^{-1}`` (its
    first column): ``3 n_time/2 - 3/4 (1 - 3**-n_time)``."""
    return 1.5 * n_time - 0.75 * (1.0 - 3.0 ** (-n_time))


def verify_bounds(op: AllAtOnceOperator, tol=1e-12) -> dict:
    """Check the inverse-norm identities of the BDF2 matrix and the singular
    value bounds of ``A`` on a dense instance.

    The largest absolute row sum of ``C^{-1}`` (its last row) equals
    ``n_time`` and the largest absolute column sum (its first column) has
    the closed form :func:`c_inverse_col_sum`.  In numpy's naming these are
    ``norm(., inf)`` and ``norm(., 1)``; some texts attach the opposite
    subscripts.  Returns measured values, targets and boolean verdicts
    (``all_ok`` combines them).
    """
    n = op.n_time * op.n_space
    if n > DENSE_LIMIT:
        raise SizeLimitError(f"dense bounds limited to {DENSE_LIMIT} unknowns, got {n}")
    nt = op.n_time
    Cinv = np.linalg.inv(op.stencil.dense())
    row_sum = np.linalg.norm(Cinv, np.inf)
    col_sum = np.linalg.norm(Cinv, 1)
    sv = np.linalg.svd(op.dense(), compute_uv=False)
    norm_a = float(np.max(np.abs(np.linalg.eigvalsh(op.jacobian.dense()))))
    smax_bound = 4.0 + op.dt * norm_a
    smin_bound = math.sqrt(6.0) / (3.0 * nt)
    rep = {
        "c_inv_max_row_sum": float(row_sum),
        "c_inv_max_row_sum_target": float(nt),
        "c_inv_max_col_sum": float(col_sum),
        "c_inv_max_col_sum_target": c_inverse_col_sum(nt),
        "sigma_max": float(sv[0]),
        "sigma_max_bound": smax_bound,
        "sigma_min": float(sv[-1]),
        "sigma_min_bound": smin_bound,
        "jacobian_norm": norm_a,
    }
    rep["row_sum_ok"] = bool(abs(row_sum - nt) <= tol)
    rep["col_sum_ok"] = bool(abs(col_sum - rep["c_inv_max_col_sum_target"]) <= tol)
    # relative slack for roundoff in the dense SVD
    slack = 1e-12 * sv[0]
    rep["sigma_max_ok"] = bool(sv[0] <= smax_bound + slack)
    rep["sigma_min_ok"] = bool(sv[-1] >= smin_bound - slack)
    rep["all_ok"] = all(rep[k] for k in ("row_sum_ok", "col_sum_ok", "sigma_max_ok", "sigma_min_ok"))
    return rep


def write_spectrum_csv(path, eigenvalues, meta=None):
    """Write ``re,im`` rows; ``meta`` items become leading ``# key=value`` lines."""
    eig = np.asarray(eigenvalues, dtype=complex)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key, val in (meta or {}).items():
            fh.write(f"# {key}={val}\n")
        w = csv.writer(fh)
        w.writerow(["re", "im"])
        for z in eig:
            w.writerow([repr(float(z.real)), repr(float(z.imag))])
