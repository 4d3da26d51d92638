"""Parallel-in-time preconditioned all-at-once solvers for Riesz fractional
diffusion equations discretized with BDF2 in time and fractional centred
differences in space."""

from rfdepint.discretization import (
    FracWeights,
    RieszJacobian1D,
    RieszJacobian2D,
    centred_weights,
    jacobian_1d,
    jacobian_2d,
)
from rfdepint.transforms import (
    SymToeplitz,
    TauOperator,
    NearSingularShiftError,
    dft_unitary,
    dst1_orthonormal,
    toeplitz_matvec,
    tau_spectrum,
    tau_spectrum_2d,
    tau_solve_shifted,
)
from rfdepint.allatonce import (
    AllAtOnceOperator,
    TimeStencil,
    apply_allatonce,
    apply_time_stencil,
    build_rhs,
    condition_bound,
)
from rfdepint.preconditioner import (
    AlphaCirculantPlan,
    PreconditionerKind,
    apply_inverse,
    build_plan,
    perturbation_rank,
)
from rfdepint.krylov import SolveReport, SolverConfig, bicgstab_left, bicgstab_right, gmres_right, solve
from rfdepint.problems import Problem1D, Problem2D, build_system, example1, example2, final_error
from rfdepint.analysis import (
    SpectrumReport,
    lambda_scatter,
    materialize,
    preconditioned_spectrum,
    verify_bounds,
)

__all__ = [
    "AllAtOnceOperator",
    "AlphaCirculantPlan",
    "FracWeights",
    "NearSingularShiftError",
    "PreconditionerKind",
    "Problem1D",
    "Problem2D",
    "RieszJacobian1D",
    "RieszJacobian2D",
    "SolveReport",
    "SolverConfig",
    "SymToeplitz",
    "TauOperator",
    "TimeStencil",
    "apply_allatonce",
    "apply_inverse",
    "apply_time_stencil",
    "SpectrumReport",
    "bicgstab_left",
    "bicgstab_right",
    "build_system",
    "lambda_scatter",
    "materialize",
    "preconditioned_spectrum",
    "solve",
    "verify_bounds",
    "build_plan",
    "build_rhs",
    "centred_weights",
    "condition_bound",
    "dft_unitary",
    "dst1_orthonormal",
    "example1",
    "example2",
    "final_error",
    "gmres_right",
    "jacobian_1d",
    "jacobian_2d",
    "perturbation_rank",
    "tau_solve_shifted",
    "tau_spectrum",
    "tau_spectrum_2d",
    "toeplitz_matvec",
]
