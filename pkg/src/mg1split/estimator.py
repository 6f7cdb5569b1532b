"""scikit-learn style front ends.

``MG1Solver`` fits the minimal nonnegative solution ``G`` of a coefficient
sequence; ``RateAnalyzer`` fits the rate quantities of a solved model and
transforms relaxation weights into spectral radii and bounds.

>>> from mg1split import MG1Solver, gen_example_1a
>>> est = MG1Solver(method="staircase").fit(gen_example_1a(10, 0.1))
>>> est.converged_
True
"""

import warnings

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_is_fitted

from . import analysis
from .model import as_model, drift, ensure_valid
from .series import residual
from .solvers import SolverConfig, solve


class MG1Solver(BaseEstimator):
    """Fixed-point solver for ``X = sum_{i=-1}^{q} A_i X^{i+1}``.

    Parameters
    ----------
    method : str, default="staircase"
        One of ``natural``, ``traditional``, ``ubased``, ``staircase``,
        ``relaxed``, ``adaptive_zero``, ``adaptive_stochastic``.
    omega : float, default=1.0
        Fixed relaxation weight for ``relaxed``.
    omega_hat : float, default=10.0
        Upper bound of the adaptive search.
    start : {"zero", "uniform"} or ndarray, default="zero"
    tol : float, default=1e-13
        Residual threshold in the infinity norm.
    max_iter : int, default=10_000_000
    trace_every : int, default=1
    check_input : bool, default=True
        Reject models that are not nonnegative and row stochastic.
    stochastic_tol : float, default=1e-8
        Row-sum tolerance used when ``fit`` receives raw blocks.

    Attributes
    ----------
    G_ : ndarray of shape (n, n)
    n_iter_ : int
    residual_ : float
    converged_ : bool
    trace_ : list of (k, residual, omega, seconds)
    model_ : MG1Model
    """

    def __init__(
        self,
        method="staircase",
        omega=1.0,
        omega_hat=10.0,
        start="zero",
        tol=1e-13,
        max_iter=10_000_000,
        trace_every=1,
        check_input=True,
        stochastic_tol=1e-8,
    ):
        self.method = method
        self.omega = omega
        self.omega_hat = omega_hat
        self.start = start
        self.tol = tol
        self.max_iter = max_iter
        self.trace_every = trace_every
        self.check_input = check_input
        self.stochastic_tol = stochastic_tol

    def _config(self):
        return SolverConfig(
            method=self.method,
            start=self.start,
            tol=self.tol,
            max_iter=self.max_iter,
            trace_every=self.trace_every,
            omega=self.omega,
            omega_hat=self.omega_hat,
        )

    def fit(self, blocks, y=None):
        """Solve for ``G``.

        ``blocks`` is an :class:`MG1Model`, a sequence of ``n x n`` arrays
        ``A_{-1}, ..., A_q`` or an array of shape ``(q + 2, n, n)``.
        """
        model = as_model(blocks, self.stochastic_tol)
        if self.check_input:
            ensure_valid(model)
        result = solve(model, self._config())
        self.model_ = model
        self.G_ = result.G_approx
        self.n_iter_ = result.iterations
        self.residual_ = result.final_residual
        self.converged_ = result.converged
        self.trace_ = result.trace
        if not result.converged:
            warnings.warn(
                f"{self.method} stopped after {result.iterations} iterations "
                f"with residual {result.final_residual:.3e}",
                ConvergenceWarning,
            )
        return self

    def score(self, blocks=None, y=None):
        """Negative residual of ``G_`` on ``blocks`` (default: the fitted model)."""
        check_is_fitted(self, "G_")
        model = self.model_ if blocks is None else as_model(blocks, self.stochastic_tol)
        return -residual(model, self.G_)


class RateAnalyzer(BaseEstimator):
    """Asymptotic rate analysis of the zero-start relaxed staircase iteration.

    ``fit`` needs a solved model; if ``G`` is not passed it is computed with
    the U-based iteration at ``solver_tol``. ``transform`` maps an array of
    relaxation weights to columns ``rho_omega, bound_lo, bound_hi``.
    """

    def __init__(self, solver_tol=1e-13, kron=False, stochastic_tol=1e-8):
        self.solver_tol = solver_tol
        self.kron = kron
        self.stochastic_tol = stochastic_tol

    def fit(self, blocks, G=None):
        model = as_model(blocks, self.stochastic_tol)
        if G is None:
            G = solve(model, method="ubased", tol=self.solver_tol).G_approx
        G = np.asarray(G, dtype=float)
        W = analysis.build_W(model, G)
        base = analysis.rho_bounds(model, G, W, 0.0)
        self.model_ = model
        self.G_ = G
        self.W_ = W
        self.rho0_ = base.rho0
        self.omega_hat_c1_ = base.omega_hat_c1
        self.sigma_min_ = base.sigma_min
        self.sigma_max_ = base.sigma_max
        self.drift_ = drift(model).eta
        if self.kron:
            k = analysis.kron_rates(model, G)
            self.rho_H0_, self.rho_H1_ = k.rho_H0, k.rho_H1
        return self

    def transform(self, omegas):
        check_is_fitted(self, "W_")
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float)).ravel()
        out = np.empty((omegas.size, 3))
        for r, omega in enumerate(omegas):
            ra = analysis.rho_bounds(self.model_, self.G_, self.W_, omega)
            out[r] = ra.rho_omega, ra.bound_lo, ra.bound_hi
        return out
