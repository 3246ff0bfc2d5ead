"""Sparse assembly of the interior-penalty DG forms.

Matrix convention: for a form ``a(u, w)`` with trial ``u`` and test ``w`` the
assembled matrix ``A`` satisfies ``a(u, w) = w @ A @ u`` (rows = test dofs).
The trilinear forms are assembled with their first argument frozen:

* ``A_A(c)``  : rows S_h (chi),   cols X_h (v)   -> a_A(c, v, chi)
* ``B_I(c)``  : rows X_h (theta), cols S_h (mu)  -> b_I(c, mu, theta)
* ``A_C(w)``  : rows X_h (theta), cols X_h (z)   -> a_C(w, w, z, theta)
* ``B_P``     : rows Q_h (p),     cols X_h (theta) -> b_P(p, theta)
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .dgspace import DgScalarSpace, DgVectorSpace, FieldCoefficients, face_traces, tabulate
from .mesh import Mesh

SIDES = (0, 1)
SIGN = (1.0, -1.0)  # contribution of E- / E+ traces to a jump


def default_sigma(q: int) -> float:
    return 10.0 * q**2


def _dofs(elem, nb, offset=0):
    return offset + elem[:, None] * nb + np.arange(nb)[None, :]


def _coo(rows, cols, vals, shape):
    """Scatter local blocks ``vals[e, i, j]`` to ``(rows[e, i], cols[e, j])``."""
    r = np.broadcast_to(rows[:, :, None], vals.shape).ravel()
    c = np.broadcast_to(cols[:, None, :], vals.shape).ravel()
    return sp.coo_matrix((vals.ravel(), (r, c)), shape=shape)


class Discretization:
    """Spaces S_h, X_h (degree q), Q_h (degree q-1) on one mesh plus the frozen operators.

    ``rule_degree`` is the exactness of the quadrature used for all polynomial
    integrands (default 3q+1); ``nonlinear_degree`` (default 3q+3) is used for
    potential terms and analytic data.
    """

    def __init__(self, mesh: Mesh, q: int = 1, sigma: float | None = None,
                 rule_degree: int | None = None, nonlinear_degree: int | None = None,
                 symmetric: bool = True):
        if q < 1:
            raise ValueError("velocity/order-parameter degree q must be >= 1")
        self.mesh = mesh
        self.q = q
        self.sigma = default_sigma(q) if sigma is None else float(sigma)
        if self.sigma <= 0:
            raise ValueError("penalty sigma must be positive")
        self.S = DgScalarSpace(mesh, q)
        self.X = DgVectorSpace(mesh, q)
        self.Q = DgScalarSpace(mesh, q - 1)
        self.rule_degree = 3 * q + 1 if rule_degree is None else rule_degree
        self.nonlinear_degree = 3 * q + 3 if nonlinear_degree is None else nonlinear_degree
        # -1: symmetric interior penalty, +1: nonsymmetric variant
        self.sym = -1.0 if symmetric else 1.0

    # ------------------------------------------------------------------ sizes
    @property
    def nS(self) -> int:
        return self.S.total_dofs

    @property
    def nX(self) -> int:
        return self.X.total_dofs

    @property
    def nQ(self) -> int:
        return self.Q.total_dofs

    def _sdofs(self, elem, space=None, comp=0):
        space = space or self.S
        return _dofs(elem, space.dofs_per_element, comp * space.total_dofs)

    # ------------------------------------------------------- scalar building blocks
    def _mass(self, space: DgScalarSpace, deg: int):
        tab = space.volume(deg)
        vals = np.einsum("kq,kqi,kqj->kij", tab.weights, tab.phi, tab.phi)
        d = self._sdofs(np.arange(self.mesh.n_elements), space)
        return _coo(d, d, vals, (space.total_dofs,) * 2).tocsr()

    def _stiffness(self):
        tab = self.S.volume(self.rule_degree)
        vals = np.einsum("kq,kqid,kqjd->kij", tab.weights, tab.grad, tab.grad)
        d = self._sdofs(np.arange(self.mesh.n_elements))
        return _coo(d, d, vals, (self.nS,) * 2)

    def _face_blocks(self, tab, boundary, consistency=True, penalty=True, sym=None):
        """SIPG face matrix (scalar); on boundary faces jump = average = trace."""
        sym = self.sym if sym is None else sym
        eta = self.sigma / tab.h
        n = tab.normals
        w = tab.weights
        mats = []
        sides = (0,) if boundary else SIDES
        phis = (tab.phi_minus, tab.phi_plus)
        dn = (np.einsum("fqnd,fd->fqn", tab.grad_minus, n),
              None if boundary else np.einsum("fqnd,fd->fqn", tab.grad_plus, n))
        elems = (tab.elem_minus, tab.elem_plus)
        avg = 1.0 if boundary else 0.5
        for s in sides:
            for t in sides:
                vals = 0.0
                if consistency:
                    vals = (-avg * SIGN[s] * np.einsum("fq,fqi,fqj->fij", w, phis[s], dn[t])
                            + sym * avg * SIGN[t] * np.einsum("fq,fqi,fqj->fij", w, dn[s], phis[t]))
                if penalty:
                    vals = vals + SIGN[s] * SIGN[t] * eta[:, None, None] * np.einsum(
                        "fq,fqi,fqj->fij", w, phis[s], phis[t])
                mats.append(_coo(self._sdofs(elems[s]), self._sdofs(elems[t]), vals, (self.nS,) * 2))
        return sum(mats)

    # ------------------------------------------------------------ constant operators
    @cached_property
    def M_S(self) -> sp.csr_matrix:
        return self._mass(self.S, 2 * self.q)

    @cached_property
    def M_Q(self) -> sp.csr_matrix:
        return self._mass(self.Q, 2 * self.q)

    @cached_property
    def M_X(self) -> sp.csr_matrix:
        return sp.block_diag([self.M_S, self.M_S], format="csr")

    @cached_property
    def A_D(self) -> sp.csr_matrix:
        """a_D: broken stiffness + SIPG terms on interior faces only."""
        A = self._stiffness() + self._face_blocks(self.S.interior(self.rule_degree), False)
        return A.tocsr()

    @cached_property
    def _A_vec_scalar(self):
        A = (self._stiffness()
             + self._face_blocks(self.S.interior(self.rule_degree), False)
             + self._face_blocks(self.S.boundary(self.rule_degree), True))
        return A.tocsr()

    @cached_property
    def A_eps(self) -> sp.csr_matrix:
        """a_eps: componentwise SIPG including boundary faces (weak v = 0)."""
        return sp.block_diag([self._A_vec_scalar] * 2, format="csr")

    @cached_property
    def G_S(self) -> sp.csr_matrix:
        """Gram matrix of the scalar DG semi-norm (interior jumps only)."""
        G = self._stiffness() + self._face_blocks(
            self.S.interior(self.rule_degree), False, consistency=False)
        return G.tocsr()

    @cached_property
    def G_X(self) -> sp.csr_matrix:
        """Gram matrix of the vector DG norm (interior and boundary jumps)."""
        G = (self._stiffness()
             + self._face_blocks(self.S.interior(self.rule_degree), False, consistency=False)
             + self._face_blocks(self.S.boundary(self.rule_degree), True, consistency=False))
        return sp.block_diag([G.tocsr()] * 2, format="csr")

    @cached_property
    def B_P(self) -> sp.csr_matrix:
        return self.assemble_b_P(self.Q)

    def assemble_b_P(self, pressure_space: DgScalarSpace) -> sp.csr_matrix:
        P, V = pressure_space, self.S
        deg = self.rule_degree
        nP = P.total_dofs
        shape = (nP, self.nX)
        allk = np.arange(self.mesh.n_elements)
        pt, vt = P.volume(deg), V.volume(deg)
        mats = []
        for d in range(2):
            vals = -np.einsum("kq,kqi,kqj->kij", pt.weights, pt.phi, vt.grad[..., d])
            mats.append(_coo(self._sdofs(allk, P), self._sdofs(allk, V, d), vals, shape))
        pi, vi = P.interior(deg), V.interior(deg)
        pphi = (pi.phi_minus, pi.phi_plus)
        vphi = (vi.phi_minus, vi.phi_plus)
        el = (vi.elem_minus, vi.elem_plus)
        for s in SIDES:
            for t in SIDES:
                for d in range(2):
                    vals = 0.5 * SIGN[t] * np.einsum(
                        "fq,fqi,fqj,f->fij", vi.weights, pphi[s], vphi[t], vi.normals[:, d])
                    mats.append(_coo(self._sdofs(el[s], P), self._sdofs(el[t], V, d), vals, shape))
        pb, vb = P.boundary(deg), V.boundary(deg)
        for d in range(2):
            vals = np.einsum("fq,fqi,fqj,f->fij", vb.weights, pb.phi_minus, vb.phi_minus, vb.normals[:, d])
            mats.append(_coo(self._sdofs(vb.elem_minus, P), self._sdofs(vb.elem_minus, V, d), vals, shape))
        return sum(mats).tocsr()

    # ------------------------------------------------------------ lagged operators
    def assemble_a_A(self, c: FieldCoefficients) -> sp.csr_matrix:
        """a_A(c, v, chi) = -sum_E (c v, grad chi) + sum_interior ({c}{v.n}, [chi])."""
        deg = self.rule_degree
        cv, _ = tabulate(c, deg)
        tab = self.S.volume(deg)
        allk = np.arange(self.mesh.n_elements)
        shape = (self.nS, self.nX)
        mats = []
        for d in range(2):
            vals = -np.einsum("kq,kq,kqi,kqj->kij", tab.weights, cv, tab.grad[..., d], tab.phi)
            mats.append(_coo(self._sdofs(allk), self._sdofs(allk, comp=d), vals, shape))
        ft = self.S.interior(deg)
        (cm, _), (cp, _) = face_traces(c, deg)
        cavg = 0.5 * (cm + cp)
        phis = (ft.phi_minus, ft.phi_plus)
        el = (ft.elem_minus, ft.elem_plus)
        for s in SIDES:
            for t in SIDES:
                for d in range(2):
                    vals = 0.5 * SIGN[s] * np.einsum(
                        "fq,fq,fqi,fqj,f->fij", ft.weights, cavg, phis[s], phis[t], ft.normals[:, d])
                    mats.append(_coo(self._sdofs(el[s]), self._sdofs(el[t], comp=d), vals, shape))
        return sum(mats).tocsr()

    def assemble_b_I(self, c: FieldCoefficients) -> sp.csr_matrix:
        """b_I(c, mu, theta) = -sum_E (c grad mu, theta) + sum_interior ({c}[mu], {theta.n})."""
        deg = self.rule_degree
        cv, _ = tabulate(c, deg)
        tab = self.S.volume(deg)
        allk = np.arange(self.mesh.n_elements)
        shape = (self.nX, self.nS)
        mats = []
        for d in range(2):
            vals = -np.einsum("kq,kq,kqi,kqj->kij", tab.weights, cv, tab.phi, tab.grad[..., d])
            mats.append(_coo(self._sdofs(allk, comp=d), self._sdofs(allk), vals, shape))
        ft = self.S.interior(deg)
        (cm, _), (cp, _) = face_traces(c, deg)
        cavg = 0.5 * (cm + cp)
        phis = (ft.phi_minus, ft.phi_plus)
        el = (ft.elem_minus, ft.elem_plus)
        for s in SIDES:  # theta side
            for t in SIDES:  # mu side
                for d in range(2):
                    vals = 0.5 * SIGN[t] * np.einsum(
                        "fq,fq,fqi,fqj,f->fij", ft.weights, cavg, phis[s], phis[t], ft.normals[:, d])
                    mats.append(_coo(self._sdofs(el[s], comp=d), self._sdofs(el[t]), vals, shape))
        return sum(mats).tocsr()

    def assemble_a_C(self, w: FieldCoefficients) -> sp.csr_matrix:
        """a_C(w, w, z, theta) with upwinding decided pointwise at face quadrature nodes."""
        deg = self.rule_degree
        wv, wg = tabulate(w, deg)
        div = wg[..., 0, 0] + wg[..., 1, 1]
        tab = self.S.volume(deg)
        allk = np.arange(self.mesh.n_elements)
        n = self.nS
        adv = np.einsum("kqd,kqjd->kqj", wv, tab.grad)
        vals = np.einsum("kq,kqj,kqi->kij", tab.weights, adv + 0.5 * div[..., None] * tab.phi, tab.phi)
        d = self._sdofs(allk)
        mats = [_coo(d, d, vals, (n, n))]

        ft = self.S.interior(deg)
        (wm, _), (wp, _) = face_traces(w, deg)
        m = np.einsum("fqd,fd->fq", 0.5 * (wm + wp), ft.normals)
        jump = np.einsum("fqd,fd->fq", wm - wp, ft.normals)
        up_m = np.where(m < 0, -m, 0.0)  # E- is the downstream side where {w}.n_e < 0
        up_p = np.where(m > 0, m, 0.0)
        phis = (ft.phi_minus, ft.phi_plus)
        el = (ft.elem_minus, ft.elem_plus)
        # (test side, trial side) -> weight function
        coef = {
            (0, 0): up_m - 0.25 * jump,
            (0, 1): -up_m,
            (1, 1): up_p - 0.25 * jump,
            (1, 0): -up_p,
        }
        for (s, t), g in coef.items():
            vals = np.einsum("fq,fq,fqi,fqj->fij", ft.weights, g, phis[s], phis[t])
            mats.append(_coo(self._sdofs(el[s]), self._sdofs(el[t]), vals, (n, n)))

        bt = self.S.boundary(deg)
        (wb, _), _ = face_traces(w, deg, boundary=True)
        mb = np.einsum("fqd,fd->fq", wb, bt.normals)
        g = np.where(mb < 0, -mb, 0.0) - 0.5 * mb
        vals = np.einsum("fq,fq,fqi,fqj->fij", bt.weights, g, bt.phi_minus, bt.phi_minus)
        db = self._sdofs(bt.elem_minus)
        mats.append(_coo(db, db, vals, (n, n)))
        C = sum(mats).tocsr()
        return sp.block_diag([C, C], format="csr")

    # -------------------------------------------------------------- nonlinear terms
    def potential_vector(self, func, c: FieldCoefficients) -> np.ndarray:
        """(func(c), chi) for every basis chi."""
        tab = self.S.volume(self.nonlinear_degree)
        cv, _ = tabulate(c, self.nonlinear_degree)
        return np.einsum("kq,kq,kqi->ki", tab.weights, func(cv), tab.phi).ravel()

    def potential_jacobian(self, dfunc, c: FieldCoefficients) -> sp.csr_matrix:
        """(dfunc(c) phi_j, phi_i): derivative of potential_vector in c."""
        tab = self.S.volume(self.nonlinear_degree)
        cv, _ = tabulate(c, self.nonlinear_degree)
        vals = np.einsum("kq,kq,kqi,kqj->kij", tab.weights, dfunc(cv), tab.phi, tab.phi)
        d = self._sdofs(np.arange(self.mesh.n_elements))
        return _coo(d, d, vals, (self.nS,) * 2).tocsr()

    def integral(self, func, c: FieldCoefficients) -> float:
        """(func(c), 1) with the same rule as potential_vector."""
        tab = self.S.volume(self.nonlinear_degree)
        cv, _ = tabulate(c, self.nonlinear_degree)
        return float(np.sum(tab.weights * func(cv)))

    def load_vector(self, f, space, t: float | None = None, rule_degree: int | None = None) -> np.ndarray:
        """(f, chi) for analytic ``f(x)`` (or ``f(x, t)``) on S_h or X_h."""
        sc = space.scalar if isinstance(space, DgVectorSpace) else space
        tab = sc.volume(self.nonlinear_degree if rule_degree is None else rule_degree)
        vals = np.asarray(f(tab.points) if t is None else f(tab.points, t), dtype=float)
        if isinstance(space, DgVectorSpace):
            return np.concatenate([
                np.einsum("kq,kq,kqi->ki", tab.weights, vals[..., d], tab.phi).ravel() for d in range(2)])
        return np.einsum("kq,kq,kqi->ki", tab.weights, vals, tab.phi).ravel()

    # ------------------------------------------------------------------ evaluators
    def a_D(self, c, chi) -> float:
        return float(_c(chi) @ (self.A_D @ _c(c)))

    def a_eps(self, v, theta) -> float:
        return float(_c(theta) @ (self.A_eps @ _c(v)))

    def b_P(self, p, theta) -> float:
        return float(_c(p) @ (self.B_P @ _c(theta)))

    def a_A(self, c, v, chi) -> float:
        return float(_c(chi) @ (self.assemble_a_A(c) @ _c(v)))

    def b_I(self, c, mu, theta) -> float:
        return float(_c(theta) @ (self.assemble_b_I(c) @ _c(mu)))

    def a_C(self, w, z, theta) -> float:
        """a_C(w, w, z, theta)."""
        return float(_c(theta) @ (self.assemble_a_C(w) @ _c(z)))

    # ------------------------------------------------------------------ helpers
    def scalar_field(self, coeffs) -> FieldCoefficients:
        return FieldCoefficients(self.S, coeffs)

    def vector_field(self, coeffs) -> FieldCoefficients:
        return FieldCoefficients(self.X, coeffs)

    def pressure_field(self, coeffs) -> FieldCoefficients:
        return FieldCoefficients(self.Q, coeffs)


def _c(f):
    return f.coeffs if isinstance(f, FieldCoefficients) else np.asarray(f)


def dump_matrix_market(A, path) -> None:
    """Write a sparse operator as MatrixMarket text (debugging aid)."""
    from scipy.io import mmwrite

    mmwrite(str(path), sp.coo_matrix(A))
