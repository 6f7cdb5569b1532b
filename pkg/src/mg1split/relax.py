"""Eligibility checks and adaptive choice of the relaxation parameter.

The functions here read an iteration state (see
:class:`mg1split.solvers.IterationState`) and return a relaxation weight for
the correction step ``X_{k+1} = Y_k + omega * Gamma_k``.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .series import power_series_tail

logger = logging.getLogger(__name__)

ELIGIBILITY_SLACK = 1e-12


@dataclass(frozen=True)
class RelaxControl:
    """Search window for adaptive relaxation.

    Attributes
    ----------
    omega_hat : float
        Upper end of the search interval ``[1, omega_hat]``.
    eps_pos : float
        Entries at or below this value are not used as ratio denominators.
    omega_floor : float
        Lower bound applied before the row-sum cap (1 for zero start, 0 for
        stochastic start).
    """

    omega_hat: float = 10.0
    eps_pos: float = 1e-14
    omega_floor: float = 1.0

    def __post_init__(self):
        if not self.omega_hat >= self.omega_floor >= 0:
            raise ValueError("need omega_hat >= omega_floor >= 0")


@dataclass(frozen=True)
class ThetaEstimate:
    theta: float
    infinite: bool = False


def check_eligibility(model, X_k, Y_k, X_next, omega, slack=ELIGIBILITY_SLACK):
    """Whether ``omega`` keeps the step monotone and substochastic.

    Tests, entrywise,
    ``omega A_1 (Y^2 - X^2) <= A_1 (X_next^2 - X^2) + sum_{i>=2} A_i (Y^{i+1} - X^{i+1})``
    and ``X_next e <= e``.
    """
    A1 = model.A1
    lhs = omega * (A1 @ (Y_k @ Y_k - X_k @ X_k))
    rhs = (
        A1 @ (X_next @ X_next - X_k @ X_k)
        + power_series_tail(model, Y_k, 2)
        - power_series_tail(model, X_k, 2)
    )
    if np.any(lhs > rhs + slack):
        return False
    return bool(np.all(X_next.sum(axis=1) <= 1.0 + slack))


def theta_estimate(X_k, X_prev, Y_k, eps_pos=1e-14):
    """Smallest ``theta`` with ``Y_k - X_k >= (X_k - X_prev) / theta``.

    Returns ``theta = 1`` when no entry constrains it and an infinite estimate
    when the previous increment is positive where the current gap vanishes.
    """
    gap = Y_k - X_k
    inc = X_k - X_prev
    live = gap > eps_pos
    if np.any(~live & (inc > eps_pos)):
        return ThetaEstimate(math.inf, infinite=True)
    if not np.any(live):
        return ThetaEstimate(1.0)
    theta = float(np.max(inc[live] / gap[live]))
    if theta <= 0:
        # Nonpositive increments only; any theta > 0 satisfies the bound.
        return ThetaEstimate(1.0)
    return ThetaEstimate(theta)


def _higher_terms(model, X, series):
    """``sum_{i>=2} A_i X^{i+1}``, reusing ``sum_{i>=1} A_i X^{i+1}`` if given."""
    if model.q < 2:
        return np.zeros_like(X)
    if series is not None:
        return series - model.A1 @ (X @ X)
    return power_series_tail(model, X, 2)


def row_sum_cap(Y_k, Gamma_k, eps_pos=1e-14):
    """Largest ``omega`` keeping ``(Y_k + omega Gamma_k) e <= e``; ``inf`` if unbounded."""
    growth = Gamma_k.sum(axis=1)
    room = 1.0 - Y_k.sum(axis=1)
    rows = growth > eps_pos
    if not np.any(rows):
        return math.inf
    return float(np.min(room[rows] / growth[rows]))


def adaptive_omega_zero(model, state, ctl):
    """Relaxation weight for a zero-start run.

    Takes the largest ``omega`` in ``[1, omega_hat]`` satisfying the linear
    sufficient condition for monotonicity, in which the unknown higher-order
    gain ``sum_{i>=2} A_i (Y^{i+1} - X^{i+1})`` is replaced by its lower
    bound from the previous increment. The value is then capped so that the
    new iterate stays substochastic. The first step (no previous iterate)
    uses 1.
    """
    if state.X_prev is None:
        return 1.0
    X, Y, G = state.X, state.Y, state.Gamma
    eps = ctl.eps_pos
    omega_hat = ctl.omega_hat
    A1 = model.A1

    L = state.a1_gap if state.a1_gap is not None else A1 @ (Y @ Y - X @ X)
    R = A1 @ (Y @ G + G @ Y)
    if model.q >= 2:
        theta = theta_estimate(X, state.X_prev, Y, eps)
        if not theta.infinite:
            gain = _higher_terms(model, X, state.series) - _higher_terms(
                model, state.X_prev, state.series_prev
            )
            R = R + gain / (omega_hat * theta.theta)

    live = L > eps
    t = float(np.min(R[live] / L[live])) if np.any(live) else math.inf
    if t >= 1.0 - 1.0 / omega_hat:
        omega = omega_hat
    else:
        omega = 1.0 / (1.0 - t)
    omega = max(min(max(omega, 1.0), omega_hat), ctl.omega_floor)

    cap = row_sum_cap(Y, G, eps)
    if cap < omega:
        if cap < 1.0:
            logger.debug("k=%d: row-sum cap %.3e below 1", state.k, cap)
        omega = max(cap, 0.0)
    return omega


def adaptive_omega_stochastic(state, ctl, omega_prev):
    """Largest ``omega`` in ``[0, omega_prev]`` keeping ``Y_k + omega Gamma_k >= 0``."""
    Y, G = state.Y, state.Gamma
    neg = G < -ctl.eps_pos
    if not np.any(neg):
        return float(omega_prev)
    bound = float(np.min(Y[neg] / -G[neg]))
    return max(0.0, min(float(omega_prev), bound))
