"""M/G/1-type coefficient sequences: container, validation, drift."""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .exceptions import PerronFailure, ValidationError
from .kernel import dominant_eig, norm_inf

DRIFT_DEAD_ZONE = 1e-12

POSITIVE_RECURRENT = "positive_recurrent"
NULL_RECURRENT = "null_recurrent"
TRANSIENT = "transient"

FATAL_KINDS = frozenset({"negative_entry", "row_sum_off"})


def check_blocks(blocks):
    """Coerce ``blocks`` into a tuple of equally sized square float arrays.

    Accepts a sequence of 2-D arrays or a single 3-D array of shape
    ``(q + 2, n, n)`` ordered ``A_{-1}, A_0, ..., A_q``.
    """
    if isinstance(blocks, np.ndarray) and blocks.ndim == 3:
        blocks = list(blocks)
    try:
        arrays = [np.array(b, dtype=float, ndmin=2) for b in blocks]
    except TypeError as exc:
        raise TypeError("blocks must be a sequence of square matrices") from exc
    if len(arrays) < 2:
        raise ValueError("need at least the blocks A_{-1} and A_0")
    n = arrays[0].shape[0]
    for i, a in enumerate(arrays):
        if a.ndim != 2 or a.shape != (n, n):
            raise ValueError(
                f"block A_{i - 1} has shape {a.shape}, expected ({n}, {n})"
            )
        if not np.all(np.isfinite(a)):
            raise ValueError(f"block A_{i - 1} has non-finite entries")
        a.setflags(write=False)
    return tuple(arrays)


@dataclass(frozen=True)
class MG1Model:
    """Banded coefficients ``A_{-1}, A_0, ..., A_q`` of ``X = sum_i A_i X^{i+1}``.

    Blocks beyond ``q`` are zero; ``block(i)`` returns a zero matrix for them,
    so a model with ``q = 0`` still has a (zero) ``A_1``.
    """

    blocks: tuple
    stochastic_tol: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "blocks", check_blocks(self.blocks))

    @property
    def n(self):
        return self.blocks[0].shape[0]

    @property
    def q(self):
        return len(self.blocks) - 2

    def block(self, i):
        """Return ``A_i`` for ``i >= -1``."""
        if i < -1:
            raise IndexError("block index must be >= -1")
        if i <= self.q:
            return self.blocks[i + 1]
        return np.zeros((self.n, self.n))

    @property
    def A_minus1(self):
        return self.blocks[0]

    @property
    def A0(self):
        return self.blocks[1]

    @property
    def A1(self):
        return self.block(1)

    def total(self):
        """``A = sum_i A_i``."""
        return np.sum(self.blocks, axis=0)

    def __eq__(self, other):
        if not isinstance(other, MG1Model):
            return NotImplemented
        return len(self.blocks) == len(other.blocks) and all(
            np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks)
        )

    __hash__ = None


@dataclass(frozen=True)
class ValidationIssue:
    """A failed model assumption.

    ``kind`` is one of ``negative_entry``, ``row_sum_off`` or
    ``reducible_suspected``; ``location`` holds ``(block_index, row, col)``
    for entries, ``(row,)`` for row sums and ``()`` for reducibility.
    """

    kind: str
    location: tuple = ()
    magnitude: float = 0.0

    @property
    def fatal(self):
        return self.kind in FATAL_KINDS


@dataclass(frozen=True)
class DriftReport:
    v: np.ndarray
    w: np.ndarray
    eta: float
    classification: str = field(default=POSITIVE_RECURRENT)


def validate(model):
    """List every violated assumption of ``model``; empty means valid.

    Irreducibility of ``sum_i A_i`` is checked on the nonzero pattern and only
    reported as ``reducible_suspected``, which is not fatal.
    """
    issues = []
    for idx, a in enumerate(model.blocks):
        for r, c in zip(*np.nonzero(a < 0)):
            issues.append(
                ValidationIssue("negative_entry", (idx - 1, int(r), int(c)), float(a[r, c]))
            )
    A = model.total()
    dev = A.sum(axis=1) - 1.0
    for r in np.nonzero(np.abs(dev) > model.stochastic_tol)[0]:
        issues.append(ValidationIssue("row_sum_off", (int(r),), float(dev[r])))
    if model.n > 1:
        ncomp, _ = connected_components(
            csr_matrix(A != 0), directed=True, connection="strong"
        )
        if ncomp > 1:
            issues.append(ValidationIssue("reducible_suspected", (), float(ncomp)))
    return issues


def ensure_valid(model):
    """Raise ``ValidationError`` on fatal issues; warn on reducibility."""
    issues = validate(model)
    fatal = [i for i in issues if i.fatal]
    if fatal:
        raise ValidationError(fatal)
    if issues:
        warnings.warn("sum of blocks may be reducible", RuntimeWarning, stacklevel=2)
    return model


def classify(eta, dead_zone=DRIFT_DEAD_ZONE):
    if eta < -dead_zone:
        return POSITIVE_RECURRENT
    if eta > dead_zone:
        return TRANSIENT
    return NULL_RECURRENT


def drift(model, tol=1e-14, max_iter=200_000):
    """Drift ``eta = v^T w`` and the recurrence class it implies.

    ``v`` is the left Perron vector of ``A = sum_i A_i`` with ``v^T e = 1``;
    ``w = sum_i i A_i e``.
    """
    A = model.total()
    n = model.n
    # Same eigenvector as A^T; the shift removes periodicity.
    est = dominant_eig(0.5 * (A.T + np.eye(n)), tol=tol, max_iter=max_iter)
    if not est.converged:
        raise PerronFailure(
            f"power iteration stalled at residual {est.residual:.3e}"
        )
    v = est.vector / est.vector.sum()
    if np.min(v) <= 0:
        raise PerronFailure("left Perron vector has nonpositive entries")
    e = np.ones(n)
    w = sum(i * (model.block(i) @ e) for i in range(-1, model.q + 1))
    eta = float(v @ w)
    return DriftReport(v=v, w=w, eta=eta, classification=classify(eta))


def is_qbd(model):
    """True when all blocks ``A_i`` with ``i >= 2`` vanish."""
    return all(norm_inf(model.block(i)) == 0 for i in range(2, model.q + 1))


def as_model(blocks, stochastic_tol=1e-8):
    """Return ``blocks`` as an :class:`MG1Model` (models pass through unchanged)."""
    if isinstance(blocks, MG1Model):
        return blocks
    return MG1Model(check_blocks(blocks), stochastic_tol=stochastic_tol)
