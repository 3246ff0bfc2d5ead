"""Quadrature on the reference triangle and the unit interval.

Reference triangle: vertices (0, 0), (1, 0), (0, 1); area 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (nq, dim) reference coordinates
    weights: np.ndarray  # (nq,)
    degree: int  # polynomial exactness

    @property
    def barycentric(self) -> np.ndarray:
        p = self.points
        if p.shape[1] == 1:
            return np.column_stack([1 - p[:, 0], p[:, 0]])
        return np.column_stack([1 - p.sum(axis=1), p])

    def __len__(self):
        return len(self.weights)


@lru_cache(maxsize=None)
def interval_rule(degree: int) -> QuadratureRule:
    """Gauss-Legendre on [0, 1], exact to ``degree``."""
    m = max(1, (degree + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(m)
    return QuadratureRule(((x + 1) / 2)[:, None], w / 2, 2 * m - 1)


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadratureRule:
    """Collapsed Gauss rule (Duffy map), exact to ``degree``, positive weights."""
    m = max(1, (degree + 2) // 2)
    xs, ws = np.polynomial.legendre.leggauss(m)
    xt, wt = roots_jacobi(m, 1.0, 0.0)
    s = (xs + 1) / 2
    t = (xt + 1) / 2
    S, T = np.meshgrid(s, t, indexing="ij")
    W = np.outer(ws / 2, wt / 4)
    pts = np.column_stack([(S * (1 - T)).ravel(), T.ravel()])
    return QuadratureRule(pts, W.ravel(), 2 * m - 1)
