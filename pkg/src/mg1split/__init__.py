"""Fixed-point solvers for the minimal nonnegative solution of M/G/1-type matrix equations."""

from .analysis import (
    analyze,
    build_P_omega,
    build_W,
    cost_model,
    cost_per_step,
    kron_rates,
    omega_hat_c1,
    optimal_omega,
    qbd_rate,
    rho_bounds,
    staircase_point,
    staircase_rho,
)
from .estimator import MG1Solver, RateAnalyzer
from .exceptions import (
    GuardExceededError,
    ParseError,
    PerronFailure,
    SingularMatrixError,
    ValidationError,
)
from .model import MG1Model, ValidationIssue, drift, ensure_valid, is_qbd, validate
from .problems import gen_example_1a, gen_example_1b, load_matrix, load_model, save_matrix, save_model
from .series import residual
from .solvers import METHODS, SolveResult, SolverConfig, solve

__version__ = "0.1.0"

__all__ = [
    "METHODS",
    "GuardExceededError",
    "MG1Model",
    "MG1Solver",
    "ParseError",
    "PerronFailure",
    "RateAnalyzer",
    "SingularMatrixError",
    "SolveResult",
    "SolverConfig",
    "ValidationError",
    "ValidationIssue",
    "analyze",
    "build_P_omega",
    "build_W",
    "cost_model",
    "cost_per_step",
    "drift",
    "ensure_valid",
    "gen_example_1a",
    "gen_example_1b",
    "is_qbd",
    "kron_rates",
    "load_matrix",
    "load_model",
    "omega_hat_c1",
    "optimal_omega",
    "qbd_rate",
    "residual",
    "rho_bounds",
    "save_matrix",
    "save_model",
    "solve",
    "staircase_point",
    "staircase_rho",
    "validate",
]
