"""Second-order finite differences: central interior, one-sided boundaries."""

from __future__ import annotations

import numpy as np

from .errors import GridTooSmall


def deriv(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """First derivative along one axis, O(h^2) everywhere."""
    if values.shape[axis] < 3:
        raise GridTooSmall("derivative stencil needs >= 3 points per axis")
    return np.gradient(values, h, axis=axis, edge_order=2)


def grad(values: np.ndarray, h: float) -> np.ndarray:
    """All first derivatives, stacked leading: (dim, *shape)."""
    return np.stack([deriv(values, h, ax) for ax in range(values.ndim)])


def hess(values: np.ndarray, h: float) -> np.ndarray:
    """All second derivatives, (dim, dim, *shape), symmetric by averaging.

    Composed first-derivative operators: uniformly O(h^2) for smooth data
    and exact on quadratics and bilinears.
    """
    d = values.ndim
    g = grad(values, h)
    out = np.empty((d, d) + values.shape)
    for i in range(d):
        for j in range(i, d):
            dij = deriv(g[j], h, i)
            if i != j:
                dij = 0.5 * (dij + deriv(g[i], h, j))
            out[i, j] = dij
            out[j, i] = dij
    return out
