"""Dense matrix primitives: LU with reuse, power iteration, Kronecker products.

Matrices are plain 2-D ``numpy.ndarray`` objects of dtype float64.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import GuardExceededError, SingularMatrixError

#: Pivots below this magnitude are treated as exact zeros.
PIVOT_FLOOR = 1e-300

#: Default cap on either dimension of a Kronecker product (32**2).
KRON_MAX_DIM = 1024

_RESTART_SEED = 0x5EED
_STALL_SWEEPS = 50


def as_square(A, name="matrix"):
    """Return ``A`` as a float64 2-D square array, raising ``ValueError`` otherwise."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def norm_inf(A):
    """Infinity norm (max absolute row sum; max absolute entry for vectors)."""
    A = np.asarray(A)
    if A.ndim == 1:
        return float(np.max(np.abs(A))) if A.size else 0.0
    return float(np.max(np.sum(np.abs(A), axis=1)))


@dataclass(frozen=True)
class LuFactor:
    """Pivoted LU factorization of a square matrix, reusable across solves."""

    lu: np.ndarray
    piv: np.ndarray

    @property
    def n(self):
        return self.lu.shape[0]


def lu_factor(A):
    """Factor a square matrix once so that many right-hand sides can reuse it.

    Raises
    ------
    SingularMatrixError
        If a pivot smaller than ``PIVOT_FLOOR`` in magnitude occurs.
    """
    A = as_square(A)
    with warnings.catch_warnings():
        # reported below as SingularMatrixError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < PIVOT_FLOOR:
        raise SingularMatrixError("zero pivot in LU factorization")
    return LuFactor(lu=lu, piv=piv)


def lu_solve(F, B):
    """Solve ``A Z = B`` for ``Z`` given ``F = lu_factor(A)``.

    ``B`` may be a vector or a matrix with ``F.n`` rows.
    """
    B = np.asarray(B, dtype=float)
    if B.shape[0] != F.n:
        raise ValueError(f"right-hand side has {B.shape[0]} rows, factor has {F.n}")
    return scipy.linalg.lu_solve((F.lu, F.piv), B, check_finite=False)


@dataclass(frozen=True)
class EigenEstimate:
    """Dominant eigenpair estimate from power iteration.

    Attributes
    ----------
    value : float
        Modulus of the dominant eigenvalue.
    vector : ndarray
        Eigenvector scaled so that its largest-magnitude entry is ``+1``.
    converged : bool
        Whether ``residual <= tol`` was reached.
    iterations : int
        Number of matrix-vector products performed.
    residual : float
        ``||M v - lam v||_inf`` where ``lam`` is the signed Rayleigh estimate
        (``lam = value`` for nonnegative matrices).
    """

    value: float
    vector: np.ndarray
    converged: bool
    iterations: int
    residual: float


def _normalize(y):
    j = int(np.argmax(np.abs(y)))
    return y / y[j]


def dominant_eig(M, tol=1e-12, max_iter=100_000):
    """Power iteration for the dominant eigenpair of ``M``.

    Starts from the all-ones vector. If the Rayleigh estimate stops moving
    (change below ``tol/10``) and the residual stops decreasing, for 50
    consecutive sweeps, while the residual is still above ``tol``, the
    iteration restarts from a pseudorandom positive vector drawn from a
    fixed-seed generator, so results are reproducible.

    Non-convergence is reported through ``EigenEstimate.converged``.
    """
    M = as_square(M)
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = M.shape[0]
    x = np.ones(n)
    rng = None
    lam = 0.0
    lam_prev = np.nan
    res = res_prev = np.inf
    stall = 0
    for it in range(1, max_iter + 1):
        y = M @ x
        lam = float(x @ y) / float(x @ x)
        res = norm_inf(y - lam * x)
        if res <= tol:
            return EigenEstimate(abs(lam), x, True, it, res)
        if not np.any(y):
            return EigenEstimate(0.0, x, True, it, 0.0)
        # The Rayleigh quotient can settle long before the vector does
        # (quadratically for symmetric M), so also require a flat residual.
        flat = abs(lam - lam_prev) < tol / 10 and res >= res_prev
        stall = stall + 1 if flat else 0
        lam_prev, res_prev = lam, res
        if stall >= _STALL_SWEEPS:
            if rng is None:
                rng = np.random.default_rng(_RESTART_SEED)
            x = _normalize(0.5 + rng.random(n))
            stall = 0
            lam_prev, res_prev = np.nan, np.inf
            continue
        x = _normalize(y)
    return EigenEstimate(abs(lam), x, False, max_iter, res)


def kron(A, B, max_dim=KRON_MAX_DIM):
    """Kronecker product with a guard on the output dimensions."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    rows = A.shape[0] * B.shape[0]
    cols = A.shape[1] * B.shape[1]
    if max_dim is not None and max(rows, cols) > max_dim:
        raise GuardExceededError(
            f"Kronecker product of size {rows}x{cols} exceeds guard {max_dim}"
        )
    return np.kron(A, B)


def vec(C):
    """Stack the columns of ``C`` into one vector."""
    return np.asarray(C).reshape(-1, order="F")
