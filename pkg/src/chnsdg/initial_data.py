"""Initial-condition presets."""

from __future__ import annotations

import numpy as np

from .projections import Analytic


def constant(cbar: float) -> Analytic:
    return Analytic(lambda x: np.full(x.shape[:-1], float(cbar)),
                    lambda x: np.zeros(x.shape))


def spinodal(seed: int = 0, amplitude: float = 0.01, modes: int = 6, mean: float = 0.0) -> Analytic:
    """mean + amplitude * truncated cosine series with seeded coefficients.

    Every term has zero normal derivative on the unit square; the series is
    scaled so its largest coefficient magnitude is one.
    """
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, size=(modes + 1, modes + 1))
    a[0, 0] = 0.0
    a /= np.abs(a).max()
    k = np.arange(modes + 1) * np.pi

    def value(x):
        cx = np.cos(x[..., 0, None] * k)
        cy = np.cos(x[..., 1, None] * k)
        return mean + amplitude * np.einsum("...i,ij,...j->...", cx, a, cy)

    def grad(x):
        cx = np.cos(x[..., 0, None] * k)
        cy = np.cos(x[..., 1, None] * k)
        sx = -k * np.sin(x[..., 0, None] * k)
        sy = -k * np.sin(x[..., 1, None] * k)
        gx = np.einsum("...i,ij,...j->...", sx, a, cy)
        gy = np.einsum("...i,ij,...j->...", cx, a, sy)
        return amplitude * np.stack([gx, gy], axis=-1)

    return Analytic(value, grad)
