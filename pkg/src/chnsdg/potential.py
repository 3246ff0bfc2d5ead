"""Chemical energy densities and their convex-concave splittings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Potential:
    """Phi = Phi_plus (convex) + Phi_minus (concave).

    ``kind`` is ``"ginzburg_landau"`` or ``"logarithmic"``.  The logarithmic
    convex part is replaced by its second-order Taylor polynomial outside
    ``[-1 + delta_trunc, 1 - delta_trunc]``; for Ginzburg-Landau the same
    extension is applied beyond ``|c| > trunc_radius`` when a radius is given.
    """

    kind: str = "ginzburg_landau"
    theta: float = 1.0
    theta_c: float = 2.0
    delta_trunc: float = 0.05
    trunc_radius: float | None = None

    def __post_init__(self):
        if self.kind not in ("ginzburg_landau", "logarithmic"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "logarithmic":
            if self.theta <= 0 or self.theta_c <= 0:
                raise ValueError("theta and theta_c must be positive")
            if not 0 < self.delta_trunc < 1:
                raise ValueError("delta_trunc must lie in (0, 1)")
        if self.trunc_radius is not None and self.trunc_radius <= 0:
            raise ValueError("trunc_radius must be positive")

    @property
    def _joint(self) -> float | None:
        if self.kind == "logarithmic":
            return 1.0 - self.delta_trunc
        return self.trunc_radius

    # raw convex part and derivatives, valid inside the joints
    def _raw_plus(self, c, order):
        if self.kind == "ginzburg_landau":
            return (0.25 * (1 + c**4), c**3, 3 * c**2)[order]
        th = self.theta
        if order == 0:
            return 0.5 * th * ((1 + c) * np.log((1 + c) / 2) + (1 - c) * np.log((1 - c) / 2))
        if order == 1:
            return 0.5 * th * np.log((1 + c) / (1 - c))
        return th / (1 - c**2)

    def _plus(self, c, order):
        c = np.asarray(c, dtype=float)
        r = self._joint
        if r is None:
            return self._raw_plus(c, order)
        inside = np.abs(c) <= r
        ci = np.where(inside, c, 0.0)
        out = np.where(inside, self._raw_plus(ci, order), 0.0)
        a = np.where(c > 0, r, -r)
        d = c - a
        f0, f1, f2 = (self._raw_plus(a, i) for i in range(3))
        ext = (f0 + f1 * d + 0.5 * f2 * d**2, f1 + f2 * d, f2 + 0 * d)[order]
        return np.where(inside, out, ext)

    def phi_plus(self, c):
        return self._plus(c, 0)

    def dphi_plus(self, c):
        return self._plus(c, 1)

    def d2phi_plus(self, c):
        return self._plus(c, 2)

    def phi_minus(self, c):
        c = np.asarray(c, dtype=float)
        if self.kind == "ginzburg_landau":
            return -0.5 * c**2
        return 0.5 * self.theta_c * (1 - c**2)

    def dphi_minus(self, c):
        c = np.asarray(c, dtype=float)
        return -c if self.kind == "ginzburg_landau" else -self.theta_c * c

    def d2phi_minus(self, c):
        c = np.asarray(c, dtype=float)
        k = 1.0 if self.kind == "ginzburg_landau" else self.theta_c
        return np.full_like(c, -k)

    def phi(self, c):
        return self.phi_plus(c) + self.phi_minus(c)

    def dphi(self, c):
        return self.dphi_plus(c) + self.dphi_minus(c)

    def d2phi(self, c):
        return self.d2phi_plus(c) + self.d2phi_minus(c)


def ginzburg_landau_direct(c):
    """Double well (1+c)^2 (1-c)^2 / 4, written without the splitting."""
    c = np.asarray(c, dtype=float)
    return 0.25 * (1 + c) ** 2 * (1 - c) ** 2
