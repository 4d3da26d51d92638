"""Benchmark harness and published reference results.

Each reference table lists rows ``(n_time, n_intervals, iter_a, err_a,
iter_1, err_1)`` for the generalized (``alpha = min(0.5, dt/2)``) and the
Strang (``alpha = 1``) preconditioners.  ``n_intervals`` is ``1/h`` in 1D and
the number of cells per side of ``(0, 2)^2`` in 2D.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from rfdepint.krylov import SolverConfig, solve
from rfdepint.preconditioner import PreconditionerKind, build_plan
from rfdepint.problems import Problem2D, build_system, example1, example2, final_error

__all__ = ["DOF_GUARD", "REFERENCE_TABLES", "BenchRow", "ReferenceTable", "dof", "run_case", "run_table"]

DOF_GUARD = 2**22


@dataclass(frozen=True)
class ReferenceTable:
    number: int
    problem: str
    gammas: tuple
    method: str
    rows: tuple

    def make_problem(self):
        if self.problem == "example1":
            return example1(*self.gammas)
        return example2(*self.gammas)


REFERENCE_TABLES = {
    1: ReferenceTable(1, "example1", (1.2,), "gmres", tuple([
        (64, 128, 7, 9.7599e-5, 19, 9.7599e-5),
        (64, 256, 7, 9.4838e-5, 19, 9.4838e-5),
        (64, 512, 8, 9.4147e-5, 19, 9.4147e-5),
        (64, 1024, 8, 9.3974e-5, 19, 9.3975e-5),
        (256, 128, 7, 9.5721e-6, 19, 9.5722e-6),
        (256, 256, 7, 6.8110e-6, 19, 6.8111e-6),
        (256, 512, 7, 6.1205e-6, 19, 6.1208e-6),
        (256, 1024, 8, 5.9481e-6, 19, 5.9482e-6),
        (1024, 128, 6, 5.0121e-6, 19, 5.0138e-6),
        (1024, 256, 7, 1.2888e-6, 19, 1.2890e-6),
        (1024, 512, 7, 5.9821e-7, 19, 5.9870e-7),
        (1024, 1024, 8, 4.2607e-7, 19, 4.2613e-7),
    ])),
    2: ReferenceTable(2, "example1", (1.5,), "gmres", tuple([
        (64, 128, 8, 1.0514e-4, 15, 1.0515e-4),
        (64, 256, 8, 9.8789e-5, 15, 9.8789e-5),
        (64, 512, 8, 9.7199e-5, 15, 9.7199e-5),
        (64, 1024, 8, 9.6802e-5, 16, 9.6802e-5),
        (256, 128, 7, 1.4536e-5, 16, 1.4536e-5),
        (256, 256, 7, 8.1809e-6, 15, 8.1810e-6),
        (256, 512, 8, 6.5922e-6, 15, 6.5922e-6),
        (256, 1024, 8, 6.1950e-6, 16, 6.1950e-6),
        (1024, 128, 7, 1.3161e-5, 15, 1.3162e-5),
        (1024, 256, 7, 3.2696e-6, 15, 3.2692e-6),
        (1024, 512, 7, 9.0813e-7, 15, 9.0882e-7),
        (1024, 1024, 8, 5.1171e-7, 16, 5.1160e-7),
    ])),
    3: ReferenceTable(3, "example1", (1.9,), "gmres", tuple([
        (64, 128, 7, 1.2052e-4, 11, 1.2052e-4),
        (64, 256, 7, 1.0303e-4, 11, 1.0303e-4),
        (64, 512, 8, 9.8653e-5, 11, 9.8653e-5),
        (64, 1024, 8, 9.7559e-5, 11, 9.7559e-5),
        (256, 128, 7, 3.8671e-5, 11, 3.8671e-5),
        (256, 256, 7, 1.1924e-5, 11, 1.1924e-5),
        (256, 512, 7, 7.5514e-6, 11, 7.5518e-6),
        (256, 1024, 7, 6.4585e-6, 11, 6.4587e-6),
        (1024, 128, 6, 3.9387e-5, 11, 3.9387e-5),
        (1024, 256, 6, 9.8111e-6, 11, 9.8118e-6),
        (1024, 512, 7, 2.4178e-6, 11, 2.4178e-6),
        (1024, 1024, 7, 7.4549e-7, 11, 7.4557e-7),
    ])),
    4: ReferenceTable(4, "example2", (1.4, 1.2), "bicgstab", tuple([
        (64, 64, 4.0, 1.2627e-4, 12.0, 1.2628e-4),
        (64, 128, 4.5, 8.0645e-5, 12.0, 8.0646e-5),
        (64, 256, 4.5, 7.8998e-5, 12.0, 7.8999e-5),
        (64, 512, 5.0, 7.8611e-5, 12.5, 7.8612e-5),
        (256, 64, 4.0, 7.4633e-5, 12.0, 7.4633e-5),
        (256, 128, 4.0, 2.1246e-5, 12.0, 2.1246e-5),
        (256, 256, 5.0, 7.8953e-6, 12.0, 7.8954e-6),
        (256, 512, 4.5, 5.0729e-6, 12.5, 5.0732e-6),
        (1024, 64, 4.0, 7.1404e-5, 12.0, 7.1404e-5),
        (1024, 128, 4.0, 1.8016e-5, 12.0, 1.8017e-5),
        (1024, 256, 4.0, 4.6657e-6, 12.0, 4.6661e-6),
        (1024, 512, 4.0, 1.3276e-6, 12.5, 1.3282e-6),
    ])),
    5: ReferenceTable(5, "example2", (1.5, 1.5), "bicgstab", tuple([
        (64, 64, 4.0, 1.5758e-4, 11.0, 1.5758e-4),
        (64, 128, 4.5, 8.1963e-5, 11.0, 8.1963e-5),
        (64, 256, 5.0, 7.9075e-5, 11.5, 7.9075e-5),
        (64, 512, 5.0, 7.8490e-5, 11.5, 7.8490e-5),
        (256, 64, 4.0, 1.0778e-4, 11.0, 1.0778e-4),
        (256, 128, 4.0, 2.9441e-5, 11.0, 2.9441e-5),
        (256, 256, 4.5, 9.8515e-6, 11.5, 9.8515e-6),
        (256, 512, 4.5, 5.1188e-6, 11.5, 5.1183e-6),
        (1024, 64, 4.0, 1.0466e-4, 11.0, 1.0466e-4),
        (1024, 128, 4.0, 2.6328e-5, 11.0, 2.6328e-5),
        (1024, 256, 4.0, 6.7380e-6, 11.5, 6.7382e-6),
        (1024, 512, 4.0, 1.8400e-6, 11.5, 1.8401e-6),
    ])),
    6: ReferenceTable(6, "example2", (1.7, 1.9), "bicgstab", tuple([
        (64, 64, 4.0, 2.3321e-4, 11.5, 2.3321e-4),
        (64, 128, 4.0, 9.5250e-5, 11.5, 9.5251e-5),
        (64, 256, 4.5, 7.9355e-5, 11.5, 7.9355e-5),
        (64, 512, 4.5, 7.8240e-5, 11.0, 7.8240e-5),
        (256, 64, 4.0, 1.8715e-4, 11.0, 1.8715e-4),
        (256, 128, 4.0, 4.9102e-5, 11.5, 4.9102e-5),
        (256, 256, 4.0, 1.4579e-5, 11.0, 1.4578e-5),
        (256, 512, 4.0, 5.9522e-6, 11.0, 5.9518e-6),
        (1024, 64, 4.0, 1.8428e-4, 11.0, 1.8428e-4),
        (1024, 128, 4.0, 4.6224e-5, 11.5, 4.6224e-5),
        (1024, 256, 4.0, 1.1700e-5, 11.5, 1.1701e-5),
        (1024, 512, 4.0, 3.0690e-6, 11.0, 3.0691e-6),
    ])),
}


def dof(problem, n_time, n_intervals) -> int:
    dim = 2 if isinstance(problem, Problem2D) or problem == "example2" else 1
    return n_time * (n_intervals - 1) ** dim


@dataclass
class BenchRow:
    """One solve, in the published column layout."""

    n_time: int
    n_intervals: int
    dof: int
    preconditioner: str
    alpha: float
    iterations: float
    cpu: float
    trr: float
    err: float
    converged: bool

    @property
    def h_label(self) -> str:
        return f"1/{self.n_intervals}"


def run_case(problem, n_time, n_intervals, kind, config: SolverConfig, repeat=1, workers=None) -> BenchRow:
    """Build, precondition and solve one configuration.

    ``cpu`` is the mean wall time of the Krylov solve over ``repeat`` runs;
    the reported solution and iteration count come from the last run.
    """
    if repeat < 1:
        raise ValueError(f"repeat must be >= 1, got {repeat}")
    op, rhs = build_system(problem, n_time, n_intervals)
    dt = problem.horizon / n_time
    plan = build_plan(kind, n_time, dt, op.jacobian)

    def A(v):
        return op.matvec(v, workers=workers)

    def M(v):
        return plan(v, workers=workers)

    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        x, report = solve(A, M, rhs, config)
        times.append(time.perf_counter() - t0)
    metrics = final_error(x, problem, n_time, n_intervals, op=op, rhs=rhs)
    label = "P_alpha" if kind.variant == "generalized" else ("P_1" if kind.variant == "strang" else "custom")
    return BenchRow(
        n_time=n_time,
        n_intervals=n_intervals,
        dof=op.n_time * op.n_space,
        preconditioner=label,
        alpha=plan.alpha,
        iterations=report.iterations,
        cpu=float(np.mean(times)),
        trr=metrics.trr,
        err=metrics.err_inf,
        converged=report.converged,
    )


def run_table(number, rows=None, config: SolverConfig | None = None, repeat=1, workers=None, allow_large=False):
    """Run selected rows of a reference table with both preconditioners.

    Returns a list of ``(reference_row, result_alpha, result_strang)``.
    Rows above :data:`DOF_GUARD` unknowns raise ``ValueError`` unless
    ``allow_large`` is set.
    """
    table = REFERENCE_TABLES[number]
    indices = range(len(table.rows)) if rows is None else list(rows)
    selected = [table.rows[i] for i in indices]
    for ref in selected:
        n = dof(table.problem, ref[0], ref[1])
        if n > DOF_GUARD and not allow_large:
            raise ValueError(f"row (n_time={ref[0]}, 1/h={ref[1]}) has {n} unknowns > guard {DOF_GUARD}")
    config = config or SolverConfig(method=table.method)
    problem = table.make_problem()
    out = []
    for ref in selected:
        nt, ni = ref[0], ref[1]
        ra = run_case(problem, nt, ni, PreconditionerKind.generalized(), config, repeat, workers)
        r1 = run_case(problem, nt, ni, PreconditionerKind.strang(), config, repeat, workers)
        out.append((ref, ra, r1))
    return out
