"""Broken polynomial spaces with an L2-orthonormal modal basis per element."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .mesh import Mesh
from .quadrature import interval_rule, triangle_rule


def monomial_exponents(q: int) -> list[tuple[int, int]]:
    return [(a, d - a) for d in range(q + 1) for a in range(d, -1, -1)]


def _monomials(pts, exps):
    x, y = pts[..., 0], pts[..., 1]
    return np.stack([x**a * y**b for a, b in exps], axis=-1)


def _monomial_grads(pts, exps):
    x, y = pts[..., 0], pts[..., 1]
    gx = [a * x ** max(a - 1, 0) * y**b if a else np.zeros_like(x) for a, b in exps]
    gy = [b * x**a * y ** max(b - 1, 0) if b else np.zeros_like(x) for a, b in exps]
    return np.stack([np.stack(gx, axis=-1), np.stack(gy, axis=-1)], axis=-1)


class ReferenceBasis:
    """Monomials orthonormalized on the reference triangle (Cholesky of the Gram matrix)."""

    def __init__(self, q: int):
        if q < 0:
            raise ValueError("degree must be nonnegative")
        self.q = q
        self.exps = monomial_exponents(q)
        rule = triangle_rule(2 * q)
        V = _monomials(rule.points, self.exps)
        gram = V.T @ (rule.weights[:, None] * V)
        L = np.linalg.cholesky(gram)
        self.coef = np.linalg.inv(L)  # phi_i = sum_j coef[i, j] m_j

    @property
    def size(self) -> int:
        return len(self.exps)

    def values(self, ref_pts):
        return _monomials(ref_pts, self.exps) @ self.coef.T

    def grads(self, ref_pts):
        g = _monomial_grads(ref_pts, self.exps)  # (..., nb, 2)
        return np.einsum("ij,...jd->...id", self.coef, g)


@dataclass(frozen=True)
class VolumeTab:
    points: np.ndarray  # (K, nq, 2) physical
    weights: np.ndarray  # (K, nq) physical
    phi: np.ndarray  # (K, nq, nb)
    grad: np.ndarray  # (K, nq, nb, 2)


@dataclass(frozen=True)
class FaceTab:
    points: np.ndarray  # (F, nf, 2)
    weights: np.ndarray  # (F, nf) physical
    normals: np.ndarray  # (F, 2)
    h: np.ndarray  # (F,)
    elem_minus: np.ndarray
    phi_minus: np.ndarray  # (F, nf, nb)
    grad_minus: np.ndarray  # (F, nf, nb, 2)
    elem_plus: np.ndarray | None = None
    phi_plus: np.ndarray | None = None
    grad_plus: np.ndarray | None = None


class Geometry:
    """Affine element maps x = p0 + J xi."""

    def __init__(self, mesh: Mesh):
        p = mesh.element_coords()
        self.p0 = p[:, 0]
        self.J = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)  # (K, 2, 2)
        self.detJ = np.linalg.det(self.J)
        self.Jinv = np.linalg.inv(self.J)

    def to_physical(self, k, ref_pts):
        return self.p0[k][..., None, :] + np.einsum("...ij,...qj->...qi", self.J[k], ref_pts)

    def to_reference(self, k, phys_pts):
        return np.einsum("...ij,...qj->...qi", self.Jinv[k], phys_pts - self.p0[k][..., None, :])


class DgScalarSpace:
    """Broken P_q space; dof ``k * nb + i`` is basis function i on element k."""

    def __init__(self, mesh: Mesh, degree: int):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        self.mesh = mesh
        self.degree = degree
        self.ref = ReferenceBasis(degree)
        self.geo = Geometry(mesh)
        self._tabs: dict = {}

    @property
    def dofs_per_element(self) -> int:
        return (self.degree + 1) * (self.degree + 2) // 2

    @property
    def total_dofs(self) -> int:
        return self.mesh.n_elements * self.dofs_per_element

    # element-wise scaling keeps each element's basis L2(E)-orthonormal
    def _phys_values(self, k, ref_pts):
        return self.ref.values(ref_pts) / np.sqrt(self.geo.detJ[k])[..., None, None]

    def _phys_grads(self, k, ref_pts):
        g = self.ref.grads(ref_pts)
        g = np.einsum("...ji,...qnj->...qni", self.geo.Jinv[k], g)
        return g / np.sqrt(self.geo.detJ[k])[..., None, None, None]

    def volume(self, rule_degree: int) -> VolumeTab:
        key = ("vol", rule_degree)
        if key not in self._tabs:
            rule = triangle_rule(rule_degree)
            k = np.arange(self.mesh.n_elements)
            pts = self.geo.to_physical(k, rule.points[None])
            w = rule.weights[None] * self.geo.detJ[:, None]
            phi = self.ref.values(rule.points)[None] / np.sqrt(self.geo.detJ)[:, None, None]
            g = self.ref.grads(rule.points)  # (nq, nb, 2)
            grad = np.einsum("kji,qnj->kqni", self.geo.Jinv, g) / np.sqrt(self.geo.detJ)[:, None, None, None]
            self._tabs[key] = VolumeTab(pts, w, phi, grad)
        return self._tabs[key]

    def _face(self, verts, normals, h, rule_degree, km, kp=None):
        rule = interval_rule(rule_degree)
        s = rule.points[:, 0]
        a = self.mesh.vertices[verts[:, 0]]
        b = self.mesh.vertices[verts[:, 1]]
        pts = a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]
        w = rule.weights[None, :] * h[:, None]
        ref_m = self.geo.to_reference(km, pts)
        tab = dict(
            points=pts, weights=w, normals=normals, h=h, elem_minus=km,
            phi_minus=self._phys_values(km, ref_m), grad_minus=self._phys_grads(km, ref_m),
        )
        if kp is not None:
            ref_p = self.geo.to_reference(kp, pts)
            tab.update(elem_plus=kp, phi_plus=self._phys_values(kp, ref_p),
                       grad_plus=self._phys_grads(kp, ref_p))
        return FaceTab(**tab)

    def interior(self, rule_degree: int) -> FaceTab:
        key = ("int", rule_degree)
        if key not in self._tabs:
            m = self.mesh
            self._tabs[key] = self._face(
                m.interior_vertices, m.interior_normals, m.interior_h, rule_degree,
                m.interior_elements[:, 0], m.interior_elements[:, 1],
            )
        return self._tabs[key]

    def boundary(self, rule_degree: int) -> FaceTab:
        key = ("bnd", rule_degree)
        if key not in self._tabs:
            m = self.mesh
            self._tabs[key] = self._face(
                m.boundary_vertices, m.boundary_normals, m.boundary_h, rule_degree,
                m.boundary_elements,
            )
        return self._tabs[key]

    @cached_property
    def mean_vector(self) -> np.ndarray:
        """Coefficient-space representation of (., 1): ``(f, 1) = mean_vector @ f``."""
        tab = self.volume(max(self.degree, 1))
        return np.einsum("kq,kqn->kn", tab.weights, tab.phi).ravel()

    @property
    def constant_vector(self) -> np.ndarray:
        """Coefficients of the constant function 1 (equal to ``mean_vector``: the basis is orthonormal)."""
        return self.mean_vector

    def block(self, coeffs):
        return np.asarray(coeffs).reshape(self.mesh.n_elements, self.dofs_per_element)


class DgVectorSpace:
    """Two scalar components; dof ``c * Ns + scalar_dof`` for component c."""

    dim = 2

    def __init__(self, mesh: Mesh, degree: int):
        self.scalar = DgScalarSpace(mesh, degree)
        self.mesh = mesh
        self.degree = degree

    @property
    def dofs_per_element(self) -> int:
        return 2 * self.scalar.dofs_per_element

    @property
    def total_dofs(self) -> int:
        return 2 * self.scalar.total_dofs

    def components(self, coeffs):
        n = self.scalar.total_dofs
        coeffs = np.asarray(coeffs)
        return coeffs[:n], coeffs[n:]


@dataclass
class FieldCoefficients:
    space: DgScalarSpace | DgVectorSpace
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.space.total_dofs,):
            raise ValueError(
                f"expected {self.space.total_dofs} coefficients, got {self.coeffs.shape}"
            )

    @property
    def is_vector(self) -> bool:
        return isinstance(self.space, DgVectorSpace)

    def copy(self) -> FieldCoefficients:
        return FieldCoefficients(self.space, self.coeffs.copy())

    def __add__(self, other):
        return FieldCoefficients(self.space, self.coeffs + _coeffs(other))

    def __sub__(self, other):
        return FieldCoefficients(self.space, self.coeffs - _coeffs(other))

    def __mul__(self, a: float):
        return FieldCoefficients(self.space, a * self.coeffs)

    __rmul__ = __mul__


def _coeffs(f):
    return f.coeffs if isinstance(f, FieldCoefficients) else np.asarray(f)


def _scalar_blocks(f: FieldCoefficients):
    if f.is_vector:
        sp = f.space.scalar
        return [sp.block(c) for c in f.space.components(f.coeffs)], sp
    return [f.space.block(f.coeffs)], f.space


def eval_field(f: FieldCoefficients, element: int, local_point):
    """Value of ``f`` on ``element`` at a reference-triangle point (or array of points)."""
    blocks, sp = _scalar_blocks(f)
    if not 0 <= element < sp.mesh.n_elements:
        raise IndexError(f"element {element} out of range")
    pts = np.atleast_2d(np.asarray(local_point, dtype=float))
    phi = sp.ref.values(pts) / np.sqrt(sp.geo.detJ[element])
    vals = np.stack([phi @ b[element] for b in blocks], axis=-1)
    if not f.is_vector:
        vals = vals[..., 0]
    return vals[0] if np.ndim(local_point) == 1 else vals


def eval_at_physical(f: FieldCoefficients, element: int, x):
    sp = f.space.scalar if f.is_vector else f.space
    ref = sp.geo.to_reference(element, np.atleast_2d(x))
    return eval_field(f, element, ref if np.ndim(x) > 1 else ref[0])


def eval_gradient(f: FieldCoefficients, element: int, local_point):
    blocks, sp = _scalar_blocks(f)
    pts = np.atleast_2d(np.asarray(local_point, dtype=float))
    g = sp._phys_grads(element, pts)  # (nq, nb, 2)
    vals = np.stack([np.einsum("qnd,n->qd", g, b[element]) for b in blocks], axis=-2)
    if not f.is_vector:
        vals = vals[..., 0, :]
    return vals[0] if np.ndim(local_point) == 1 else vals


def jump_average(f: FieldCoefficients, face: int, face_point: float, boundary: bool = False):
    """Jump ``f|E- - f|E+`` and average at parameter ``face_point`` in [0, 1] along the face.

    On boundary faces both coincide with the interior trace.
    """
    m = f.space.mesh
    verts = m.boundary_vertices if boundary else m.interior_vertices
    a, b = m.vertices[verts[face]]
    x = a + face_point * (b - a)
    if boundary:
        t = eval_at_physical(f, int(m.boundary_elements[face]), x)
        return t, t
    km, kp = m.interior_elements[face]
    um = eval_at_physical(f, int(km), x)
    up = eval_at_physical(f, int(kp), x)
    return um - up, 0.5 * (um + up)


def tabulate(f: FieldCoefficients, rule_degree: int):
    """Values (K, nq[, 2]) and gradients (K, nq[, 2], 2) at volume quadrature points."""
    blocks, sp = _scalar_blocks(f)
    tab = sp.volume(rule_degree)
    vals = [np.einsum("kqn,kn->kq", tab.phi, b) for b in blocks]
    grads = [np.einsum("kqnd,kn->kqd", tab.grad, b) for b in blocks]
    if f.is_vector:
        return np.stack(vals, axis=-1), np.stack(grads, axis=-2)
    return vals[0], grads[0]


def face_traces(f: FieldCoefficients, rule_degree: int, boundary: bool = False):
    """Traces on faces: ((val_minus, grad_minus), (val_plus, grad_plus) or None)."""
    blocks, sp = _scalar_blocks(f)
    tab = sp.boundary(rule_degree) if boundary else sp.interior(rule_degree)

    def side(elem, phi, grad):
        v = [np.einsum("fqn,fn->fq", phi, b[elem]) for b in blocks]
        g = [np.einsum("fqnd,fn->fqd", grad, b[elem]) for b in blocks]
        if f.is_vector:
            return np.stack(v, axis=-1), np.stack(g, axis=-2)
        return v[0], g[0]

    minus = side(tab.elem_minus, tab.phi_minus, tab.grad_minus)
    plus = None if boundary else side(tab.elem_plus, tab.phi_plus, tab.grad_plus)
    return minus, plus


def l2_project(func, space, rule_degree: int | None = None) -> FieldCoefficients:
    """Elementwise L2 projection; the basis is orthonormal so local mass matrices are identity.

    ``func(x)`` takes points of shape (..., 2) and returns (...) or (..., 2).
    """
    if callable(func) is False:
        raise TypeError("func must be callable")
    sp = space.scalar if isinstance(space, DgVectorSpace) else space
    deg = rule_degree if rule_degree is not None else 3 * max(space.degree, 1) + 3
    tab = sp.volume(deg)
    vals = np.asarray(func(tab.points), dtype=float)
    if isinstance(space, DgVectorSpace):
        vals = np.broadcast_to(vals, tab.points.shape)
        comps = [np.einsum("kq,kqn,kq->kn", tab.weights, tab.phi, vals[..., c]).ravel() for c in range(2)]
        return FieldCoefficients(space, np.concatenate(comps))
    vals = np.broadcast_to(vals, tab.weights.shape)
    return FieldCoefficients(space, np.einsum("kq,kqn,kq->kn", tab.weights, tab.phi, vals).ravel())


def local_mass_matrices(space: DgScalarSpace, rule_degree: int | None = None) -> np.ndarray:
    tab = space.volume(rule_degree if rule_degree is not None else 2 * space.degree)
    return np.einsum("kq,kqi,kqj->kij", tab.weights, tab.phi, tab.phi)
