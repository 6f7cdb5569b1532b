"""Horner evaluation of the matrix power series and the residual."""

import numpy as np

from .kernel import norm_inf


def power_series_tail(model, X, from_index=-1):
    """``sum_{i=from_index}^{q} A_i X^{i+1}`` by Horner's rule.

    Uses ``q - from_index`` products for the polynomial in ``X`` plus
    ``from_index + 1`` trailing products by ``X``.
    """
    if from_index < -1:
        raise ValueError("from_index must be >= -1")
    X = np.asarray(X, dtype=float)
    q = model.q
    if from_index > q:
        return np.zeros_like(X)
    S = model.block(q)
    for i in range(q - 1, from_index - 1, -1):
        S = model.block(i) + S @ X
    for _ in range(from_index + 1):
        S = S @ X
    return S


def residual(model, X):
    """``||X - sum_{i=-1}^{q} A_i X^{i+1}||_inf``."""
    return norm_inf(X - power_series_tail(model, X, -1))


def polynomial_sum(model, X):
    """``sum_{i=0}^{q} A_i X^i`` by Horner's rule."""
    X = np.asarray(X, dtype=float)
    S = model.block(model.q)
    for i in range(model.q - 1, -1, -1):
        S = model.block(i) + S @ X
    return S
