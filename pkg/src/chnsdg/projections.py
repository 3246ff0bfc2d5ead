"""Elliptic projection onto S_h and mean-removal utilities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dgspace import DgScalarSpace, FieldCoefficients
from .forms import Discretization


class SingularSystemError(RuntimeError):
    pass


@dataclass(frozen=True)
class Analytic:
    """A smooth scalar function with (optionally) its gradient, both vectorized over (..., 2)."""

    value: Callable
    grad: Callable | None = None

    def __call__(self, x):
        return self.value(x)

    def gradient(self, x, step: float = 1e-3):
        if self.grad is not None:
            return np.asarray(self.grad(x), dtype=float)
        # fourth-order central differences
        out = []
        for d in range(2):
            e = np.zeros(2)
            e[d] = step
            f = self.value
            out.append((-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * step))
        return np.stack(out, axis=-1)


def _as_analytic(c):
    return c if isinstance(c, Analytic) else Analytic(c)


def a_D_load(disc: Discretization, c: Analytic) -> np.ndarray:
    """a_D(c, chi) for a continuous function c: its jumps vanish, so only the
    volume term and the consistency term with {grad c . n}[chi] remain."""
    S = disc.S
    deg = disc.nonlinear_degree
    tab = S.volume(deg)
    g = c.gradient(tab.points)
    vol = np.einsum("kq,kqd,kqid->ki", tab.weights, g, tab.grad).ravel()
    ft = S.interior(deg)
    gn = np.einsum("fqd,fd->fq", c.gradient(ft.points), ft.normals)
    out = vol.copy()
    nb = S.dofs_per_element
    for elem, phi, sign in ((ft.elem_minus, ft.phi_minus, 1.0), (ft.elem_plus, ft.phi_plus, -1.0)):
        contrib = -sign * np.einsum("fq,fq,fqi->fi", ft.weights, gn, phi)
        np.add.at(out, elem[:, None] * nb + np.arange(nb), contrib)
    return out


class EllipticProjector:
    """Factorized system [[A_D, m], [m^T, 0]] imposing the mean through one multiplier.

    The mean of analytic data is integrated with a rule of degree
    ``mean_degree`` (default: twice the nonlinear degree) so that it matches
    the exact integral to roundoff for smooth data.
    """

    def __init__(self, disc: Discretization, mean_degree: int | None = None):
        self.disc = disc
        self.mean_degree = 2 * disc.nonlinear_degree if mean_degree is None else mean_degree
        m = disc.S.mean_vector[:, None]
        K = sp.bmat([[disc.A_D, sp.csr_matrix(m)], [sp.csr_matrix(m.T), None]], format="csc")
        try:
            self._lu = spla.splu(K)
        except RuntimeError as exc:
            raise SingularSystemError(f"elliptic projection system is singular: {exc}") from exc

    def _solve(self, rhs, mean):
        sol = self._lu.solve(np.append(rhs, mean))
        if not np.all(np.isfinite(sol)):
            raise SingularSystemError("elliptic projection produced non-finite values")
        return FieldCoefficients(self.disc.S, sol[:-1])

    def project(self, c) -> FieldCoefficients:
        if isinstance(c, FieldCoefficients):
            if c.space is not self.disc.S:
                raise ValueError("field does not live on this discretization's S_h")
            return self._solve(self.disc.A_D @ c.coeffs, self.disc.S.mean_vector @ c.coeffs)
        c = _as_analytic(c)
        S = self.disc.S
        tab = S.volume(self.mean_degree)
        mean = float(np.sum(tab.weights * np.broadcast_to(np.asarray(c(tab.points), dtype=float),
                                                           tab.weights.shape)))
        return self._solve(a_D_load(self.disc, c), mean)

    __call__ = project


def elliptic_project(c, disc: Discretization) -> FieldCoefficients:
    return EllipticProjector(disc).project(c)


def remove_mean(f: FieldCoefficients) -> FieldCoefficients:
    space = f.space
    if not isinstance(space, DgScalarSpace):
        raise TypeError("remove_mean applies to scalar fields")
    area = space.mesh.area
    mean = space.mean_vector @ f.coeffs / area
    return FieldCoefficients(space, f.coeffs - mean * space.constant_vector)
