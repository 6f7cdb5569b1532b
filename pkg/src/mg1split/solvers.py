"""Fixed-point iterations for the minimal nonnegative solution ``G``.

Every method solves ``X = sum_{i=-1}^{q} A_i X^{i+1}``:

``natural``
    ``X_{k+1} = sum_i A_i X_k^{i+1}``.
``traditional``
    ``(I - A_0) X_{k+1} = A_{-1} + sum_{i>=1} A_i X_k^{i+1}``.
``ubased``
    ``(I - sum_{i>=0} A_i X_k^i) X_{k+1} = A_{-1}``.
``staircase`` / ``relaxed``
    a traditional step producing ``Y_k``, then
    ``X_{k+1} = Y_k + omega (I - A_0)^{-1} A_1 (Y_k^2 - X_k^2)`` with
    ``omega = 1`` or a fixed ``omega``.
``adaptive_zero`` / ``adaptive_stochastic``
    the relaxed step with ``omega`` chosen per iteration by
    :mod:`mg1split.relax`. ``adaptive_stochastic`` is meant for stochastic
    starts; from any other start its weight is additionally capped by the
    ``adaptive_zero`` rule.
"""

import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .kernel import LuFactor, lu_factor, lu_solve, norm_inf
from .relax import RelaxControl, adaptive_omega_stochastic, adaptive_omega_zero
from .series import polynomial_sum, power_series_tail, residual

__all__ = [
    "METHODS",
    "STAIRCASE_FAMILY",
    "IterationState",
    "SolveResult",
    "SolverConfig",
    "initial_state",
    "is_stochastic",
    "power_series_tail",
    "residual",
    "solve",
    "start_matrix",
    "staircase_stage",
    "step_natural",
    "step_staircase",
    "step_traditional",
    "step_ubased",
]

METHODS = (
    "natural",
    "traditional",
    "ubased",
    "staircase",
    "relaxed",
    "adaptive_zero",
    "adaptive_stochastic",
)
STAIRCASE_FAMILY = frozenset({"staircase", "relaxed", "adaptive_zero", "adaptive_stochastic"})

START_ROWSUM_SLACK = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Method, start matrix and stopping rule for :func:`solve`.

    ``start`` is ``"zero"``, ``"uniform"`` (the stochastic ``e e^T / n``) or an
    explicit nonnegative matrix with row sums at most 1. ``omega`` is used by
    ``relaxed``; ``omega_hat`` bounds the adaptive methods.
    """

    method: str = "staircase"
    start: Union[str, np.ndarray] = "zero"
    tol: float = 1e-13
    max_iter: int = 10_000_000
    trace_every: int = 1
    omega: float = 1.0
    omega_hat: float = 10.0
    eps_pos: float = 1e-14

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")
        if self.omega < 0:
            raise ValueError("omega must be >= 0")
        if self.omega_hat < 1:
            raise ValueError("omega_hat must be >= 1")


@dataclass
class IterationState:
    """Quantities carried from one iteration to the next.

    ``series`` caches ``sum_{i>=1} A_i X^{i+1}`` for the current iterate,
    ``a1_gap`` holds ``A_1 (Y^2 - X^2)`` once the staircase stage has run.
    """

    X: np.ndarray
    k: int = 0
    X_prev: Optional[np.ndarray] = None
    Y: Optional[np.ndarray] = None
    Gamma: Optional[np.ndarray] = None
    a1_gap: Optional[np.ndarray] = None
    lu_IA0: Optional[LuFactor] = None
    omega_used: float = math.nan
    series: Optional[np.ndarray] = None
    series_prev: Optional[np.ndarray] = None


@dataclass
class SolveResult:
    """Outcome of :func:`solve`.

    ``trace`` holds ``(k, residual, omega, elapsed_seconds)`` tuples, where
    ``omega`` is the weight used to produce ``X_k`` (NaN when not applicable).
    """

    G_approx: np.ndarray
    converged: bool
    iterations: int
    final_residual: float
    method: str = ""
    trace: list = field(default_factory=list)


def start_matrix(start, n):
    """Materialize a start specification as an ``n x n`` array."""
    if isinstance(start, str):
        if start == "zero":
            return np.zeros((n, n))
        if start == "uniform":
            return np.full((n, n), 1.0 / n)
        raise ValueError(f"unknown start {start!r}")
    X0 = np.array(start, dtype=float, ndmin=2)
    if X0.shape != (n, n):
        raise ValueError(f"start matrix has shape {X0.shape}, expected ({n}, {n})")
    if np.any(X0 < 0):
        raise ValueError("start matrix must be nonnegative")
    if np.any(X0.sum(axis=1) > 1.0 + START_ROWSUM_SLACK):
        raise ValueError("start matrix row sums must not exceed 1")
    return X0


def is_stochastic(X, slack=START_ROWSUM_SLACK):
    """Whether every row of ``X`` sums to 1 within ``slack``."""
    return bool(np.all(np.abs(X.sum(axis=1) - 1.0) <= slack))


def initial_state(model, X0, factor=True):
    """State at ``k = 0``; factors ``I - A_0`` once when ``factor`` is set."""
    lu = lu_factor(np.eye(model.n) - model.A0) if factor else None
    return IterationState(X=np.array(X0, dtype=float), lu_IA0=lu)


def _series(state, model):
    if state.series is None:
        return power_series_tail(model, state.X, 1)
    return state.series


def _lu(state, model):
    if state.lu_IA0 is None:
        return lu_factor(np.eye(model.n) - model.A0)
    return state.lu_IA0


def _advance(state, X_next, omega=math.nan, **extra):
    return replace(
        state,
        X=X_next,
        X_prev=state.X,
        k=state.k + 1,
        omega_used=omega,
        series=None,
        series_prev=state.series,
        **extra,
    )


def step_natural(state, model):
    X_next = power_series_tail(model, state.X, -1)
    return _advance(state, X_next)


def step_traditional(state, model):
    rhs = model.A_minus1 + _series(state, model)
    X_next = lu_solve(_lu(state, model), rhs)
    return _advance(state, X_next, omega=0.0, Y=X_next, Gamma=None, a1_gap=None)


def step_ubased(state, model):
    """One U-based step; factors ``I - sum_{i>=0} A_i X^i`` afresh."""
    U = polynomial_sum(model, state.X)
    F = lu_factor(np.eye(model.n) - U)
    X_next = lu_solve(F, model.A_minus1)
    return _advance(state, X_next)


def staircase_stage(state, model):
    """Compute ``Y_k`` and ``Gamma_k`` without forming ``X_{k+1}``."""
    X = state.X
    F = _lu(state, model)
    series = _series(state, model)
    Y = lu_solve(F, model.A_minus1 + series)
    a1_gap = model.A1 @ (Y @ Y - X @ X)
    Gamma = lu_solve(F, a1_gap)
    return replace(state, Y=Y, Gamma=Gamma, a1_gap=a1_gap, series=series, lu_IA0=F)


def step_staircase(state, model, omega=1.0):
    """Staircase step ``X_{k+1} = Y_k + omega Gamma_k``; ``omega = 0`` is traditional."""
    if omega < 0:
        raise ValueError("omega must be >= 0")
    staged = staircase_stage(state, model)
    return _combine(staged, omega)


def _combine(staged, omega):
    X_next = staged.Y + omega * staged.Gamma
    return _advance(staged, X_next, omega=float(omega))


def solve(model, config=None, **kwargs):
    """Iterate the configured method until the residual is at most ``tol``.

    Parameters
    ----------
    model : MG1Model
    config : SolverConfig, optional
        Defaults to ``SolverConfig(**kwargs)``.

    Returns
    -------
    SolveResult
        Non-convergence within ``max_iter`` is reported via ``converged=False``.
    """
    if config is None:
        config = SolverConfig(**kwargs)
    elif kwargs:
        config = replace(config, **kwargs)
    method = config.method
    n = model.n
    X0 = start_matrix(config.start, n)
    state = initial_state(model, X0, factor=method != "natural" and method != "ubased")

    zero_ctl = RelaxControl(config.omega_hat, config.eps_pos, omega_floor=1.0)
    stoch_ctl = RelaxControl(config.omega_hat, config.eps_pos, omega_floor=0.0)
    omega_prev = config.omega_hat
    # Off a stochastic start the nonnegativity rule alone can overshoot G.
    guard_zero = method == "adaptive_stochastic" and not is_stochastic(X0)

    trace = []
    t0 = time.perf_counter()
    A_minus1, A0 = model.A_minus1, model.A0
    while True:
        X = state.X
        if method == "natural" or method == "ubased":
            r = residual(model, X)
        else:
            state.series = power_series_tail(model, X, 1)
            r = norm_inf(X - A_minus1 - A0 @ X - state.series)
        done = r <= config.tol or state.k >= config.max_iter or not math.isfinite(r)
        if done or state.k % config.trace_every == 0:
            trace.append((state.k, r, state.omega_used, time.perf_counter() - t0))
        if done:
            break

        if method == "natural":
            state = step_natural(state, model)
        elif method == "traditional":
            state = step_traditional(state, model)
        elif method == "ubased":
            state = step_ubased(state, model)
        elif method == "staircase":
            state = step_staircase(state, model, 1.0)
        elif method == "relaxed":
            state = step_staircase(state, model, config.omega)
        else:
            staged = staircase_stage(state, model)
            if method == "adaptive_zero":
                omega = adaptive_omega_zero(model, staged, zero_ctl)
            else:
                omega = omega_prev = adaptive_omega_stochastic(staged, stoch_ctl, omega_prev)
                if guard_zero:
                    omega = min(omega, adaptive_omega_zero(model, staged, zero_ctl))
            state = _combine(staged, omega)

    return SolveResult(
        G_approx=state.X,
        converged=bool(r <= config.tol),
        iterations=state.k,
        final_residual=float(r),
        method=method,
        trace=trace,
    )
