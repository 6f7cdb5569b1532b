"""Convergence-rate quantities for the (relaxed) staircase iteration.

All functions take a converged ``G`` as input; nothing here iterates on the
matrix equation itself.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import GuardExceededError, PerronFailure
from .kernel import dominant_eig, kron, lu_factor, lu_solve
from .model import is_qbd

C1_TOL = 1e-14
KRON_N_GUARD = 32


@dataclass(frozen=True)
class RateAnalysis:
    """Spectral bounds for the zero-start relaxed iteration at one ``omega``.

    ``bound_lo <= rho_omega <= bound_hi`` holds whenever ``omega`` is within
    the nonnegativity cap ``omega_hat_c1`` and ``v`` is positive.
    """

    W: np.ndarray
    omega: float
    rho0: float
    omega_hat_c1: float
    P_omega: np.ndarray
    rho_omega: float
    sigma_min: float
    sigma_max: float
    bound_lo: float
    bound_hi: float
    v: np.ndarray = field(repr=False, default=None)
    u: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class StaircaseEigenPoint:
    lam: float
    omega: float
    rho_s: float
    omega_star: float
    rho_at_star: float


@dataclass(frozen=True)
class KronAnalysis:
    rho_H0: float
    rho_H1: float
    n_guard: int = KRON_N_GUARD


@dataclass(frozen=True)
class CostModel:
    """Multiplicative operations per iteration, by method."""

    n: int
    q: int
    gamma: float
    per_step: dict


def _inv_IA0(model):
    return lu_factor(np.eye(model.n) - model.A0)


def _matrix_powers(G, top):
    powers = [np.eye(G.shape[0])]
    for _ in range(top):
        powers.append(powers[-1] @ G)
    return powers


def build_W(model, G):
    """``W = sum_{i=1}^{q} A_i (I + G + ... + G^i)``."""
    n = model.n
    W = np.zeros((n, n))
    cumulative = np.eye(n)
    Gp = np.eye(n)
    for i in range(1, model.q + 1):
        Gp = Gp @ G
        cumulative = cumulative + Gp
        W += model.block(i) @ cumulative
    return W


def _parts(model, G, W, F=None):
    if F is None:
        F = _inv_IA0(model)
    K = lu_solve(F, W)
    J = lu_solve(F, model.A1 @ (np.eye(model.n) + G))
    return K, J


def build_P_omega(model, G, W, omega, F=None):
    """``P(omega) = K - omega J (I - K)`` with ``K = (I-A_0)^{-1} W``, ``J = (I-A_0)^{-1} A_1 (I+G)``."""
    K, J = _parts(model, G, W, F)
    return K - omega * (J @ (np.eye(model.n) - K))


def omega_hat_c1(model, G, W, F=None, floor=True):
    """Largest ``omega`` keeping ``W - omega A_1 (I+G) (I-A_0)^{-1} (I-A_0-W) >= 0``.

    Returns ``math.inf`` when the subtracted matrix has no positive entry.
    Values below 1 are raised to 1 with a warning unless ``floor=False``.
    """
    if F is None:
        F = _inv_IA0(model)
    n = model.n
    K = lu_solve(F, W)
    T = model.A1 @ (np.eye(n) + G) @ (np.eye(n) - K)
    live = T > C1_TOL
    if not np.any(live):
        return math.inf
    value = float(np.min(W[live] / T[live]))
    if floor and value < 1.0:
        warnings.warn(
            f"nonnegativity cap {value:.6g} is below 1; using 1", RuntimeWarning, stacklevel=2
        )
        value = 1.0
    return value


def _perron(M, what, tol=1e-13, max_iter=500_000):
    est = dominant_eig(M, tol=tol, max_iter=max_iter)
    if not est.converged:
        raise PerronFailure(f"power iteration on {what} did not converge (residual {est.residual:.2e})")
    return est


def rho_bounds(model, G, W=None, omega=1.0):
    """Collatz-Wielandt sandwich for ``rho(P(omega))``.

    With ``v`` the Perron vector of ``P(0)`` and ``u = J v``,
    ``rho0 - omega (1 - rho0) max(u/v) <= rho(P(omega)) <= rho0 - omega (1 - rho0) min(u/v)``.
    """
    if W is None:
        W = build_W(model, G)
    F = _inv_IA0(model)
    K, J = _parts(model, G, W, F)
    est0 = _perron(K, "P(0)")
    v = est0.vector
    if np.min(v) < -1e-12:
        raise PerronFailure("Perron vector of P(0) has negative entries")
    rho0 = est0.value
    u = J @ v
    pos = v > 1e-12
    if not np.all(pos):
        warnings.warn("Perron vector of P(0) is not strictly positive", RuntimeWarning, stacklevel=2)
    ratios = u[pos] / v[pos]
    sigma_min, sigma_max = float(np.min(ratios)), float(np.max(ratios))

    P = K - omega * (J @ (np.eye(model.n) - K))
    if omega == 0:
        rho_omega = rho0
    else:
        est = dominant_eig(P, tol=1e-13, max_iter=500_000)
        rho_omega = est.value
    return RateAnalysis(
        W=W,
        omega=float(omega),
        rho0=rho0,
        omega_hat_c1=omega_hat_c1(model, G, W, F, floor=False),
        P_omega=P,
        rho_omega=rho_omega,
        sigma_min=sigma_min,
        sigma_max=sigma_max,
        bound_lo=rho0 - omega * (1.0 - rho0) * sigma_max,
        bound_hi=rho0 - omega * (1.0 - rho0) * sigma_min,
        v=v,
        u=u,
    )


def qbd_rate(rho0, omega):
    """Exact ``rho(P(omega))`` for a quasi-birth-death model."""
    return rho0 * (1.0 - omega * (1.0 - rho0))


def _check_lambda(lam):
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")


def _critical_omegas(lam):
    """Zeros ``2/(1+s)`` and ``2(1+s)/lambda^2`` of the discriminant, ``s = sqrt(1-lambda^2)``."""
    s = math.sqrt(1.0 - lam * lam)
    return 2.0 / (1.0 + s), 2.0 * (1.0 + s) / (lam * lam)


def optimal_omega(lam):
    """Minimizer ``omega*`` of the staircase spectral radius and ``rho* = 1 - sqrt(1-lambda^2)``.

    ``omega*`` is the smaller zero of the discriminant; the larger one makes
    the double root ``1 + sqrt(1-lambda^2) > 1``.
    """
    _check_lambda(lam)
    omega_star, _ = _critical_omegas(lam)
    return omega_star, 1.0 - math.sqrt(1.0 - lam * lam)


def staircase_rho(lam, omega):
    """Spectral radius of the relaxed staircase splitting for a Jacobi eigenvalue ``lam``.

    Largest root modulus of ``mu^2 - lam^2 omega mu + lam^2 (omega - 1) = 0``.
    Complex roots share the modulus ``sqrt(lam^2 (omega - 1))``.
    """
    _check_lambda(lam)
    if omega < 0:
        raise ValueError("omega must be >= 0")
    l2 = lam * lam
    b = l2 * omega
    disc = b * b - 4.0 * l2 * (omega - 1.0)
    if abs(disc) < 1e-6 * b * b:
        # Cancellation near the double root; the factored form is accurate.
        lo, hi = _critical_omegas(lam)
        disc = l2 * l2 * (omega - lo) * (omega - hi)
    if disc >= 0:
        return abs(0.5 * (b + math.sqrt(disc)))
    return math.sqrt(l2 * (omega - 1.0))


def staircase_point(lam, omega):
    omega_star, rho_star = optimal_omega(lam)
    return StaircaseEigenPoint(
        lam=lam,
        omega=omega,
        rho_s=staircase_rho(lam, omega),
        omega_star=omega_star,
        rho_at_star=rho_star,
    )


def kron_rates(model, G, n_guard=KRON_N_GUARD):
    """Spectral radii of the stochastic-start error propagators at ``omega = 0`` and ``1``."""
    n = model.n
    if n > n_guard:
        raise GuardExceededError(f"n = {n} exceeds the Kronecker guard {n_guard}")
    q = model.q
    max_dim = n * n
    F = _inv_IA0(model)
    Gp = _matrix_powers(G, q + 1)
    GTp = [P.T for P in Gp]
    MinvA = [None] + [lu_solve(F, model.block(i)) for i in range(1, q + 1)]
    A1 = model.A1
    A1G = A1 @ G

    H0 = np.zeros((max_dim, max_dim))
    inner = np.zeros((max_dim, max_dim))
    for i in range(1, q + 1):
        Ai = model.block(i)
        if not np.any(Ai):
            continue
        for j in range(i + 1):
            MAG = MinvA[i] @ Gp[j]
            H0 += kron(GTp[i - j], MAG, max_dim)
            if i >= 2:
                inner += kron(GTp[i - j], Ai @ Gp[j], max_dim)
            inner += kron(GTp[i - j], A1G @ MAG, max_dim)
            inner += kron(GTp[i - j + 1], A1 @ MAG, max_dim)
    H1 = kron(np.eye(n), lu_solve(F, np.eye(n)), max_dim) @ inner
    rho0 = _perron(H0, "H0").value if np.any(H0) else 0.0
    rho1 = _perron(H1, "H1").value if np.any(H1) else 0.0
    return KronAnalysis(rho_H0=rho0, rho_H1=rho1, n_guard=n_guard)


_COSTS = {
    "traditional": (0.0, 2.0),
    "ubased": (4.0 / 3.0, 1.0),
    "staircase": (1.0, 4.0),
    "relaxed": (1.0, 4.0),
    "adaptive_zero": (3.0, 4.0),
    # These two counts are extrapolations, not itemized derivations.
    "adaptive_stochastic": (1.0, 4.0),
    "natural": (1.0, 1.0),
}

EXTRAPOLATED_COSTS = frozenset({"natural", "adaptive_stochastic"})


def cost_per_step(method, n, q, gamma=1.0):
    """Leading multiplicative-operation count of one iteration.

    ``gamma n^2`` is the cost of one product ``A_i Z`` or one solve with
    ``I - A_0``; ``gamma = n`` models dense blocks.
    """
    if n < 1 or q < 1:
        raise ValueError("n and q must be >= 1")
    try:
        extra_cubes, sparse_terms = _COSTS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}") from None
    return (q + extra_cubes) * n**3 + sparse_terms * gamma * n**2


def cost_model(n, q, gamma=1.0):
    return CostModel(
        n=n, q=q, gamma=gamma, per_step={m: cost_per_step(m, n, q, gamma) for m in _COSTS}
    )


def analyze(model, G, omegas=()):
    """Rate summary of ``model`` at the given ``omega`` values.

    Returns a dict with ``rho0``, ``omega_hat_c1``, ``sigma_min``,
    ``sigma_max``, ``qbd`` and a list ``rows`` of
    ``(omega, rho_omega, bound_lo, bound_hi)``.
    """
    W = build_W(model, G)
    base = rho_bounds(model, G, W, 0.0)
    rows = []
    for omega in omegas:
        ra = rho_bounds(model, G, W, omega)
        rows.append((float(omega), ra.rho_omega, ra.bound_lo, ra.bound_hi))
    return {
        "rho0": base.rho0,
        "omega_hat_c1": base.omega_hat_c1,
        "sigma_min": base.sigma_min,
        "sigma_max": base.sigma_max,
        "qbd": is_qbd(model),
        "rows": rows,
    }
