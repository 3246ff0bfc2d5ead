"""Exact rational evaluation of the six DG forms on a tiny mesh.

Fields are given per element as sympy polynomials in physical (x, y) with
rational coefficients; every integral is computed symbolically.  Face
orientation, upwind sets and penalty scaling are rebuilt from the raw
vertex/element arrays without using the package's mesh connectivity.
"""

from __future__ import annotations

import numpy as np
import sympy as sym

from chnsdg.dgspace import FieldCoefficients

x, y, s, t = sym.symbols("x y s t", real=True)


def _tri_integral(expr, P):
    (x0, y0), (x1, y1), (x2, y2) = P
    J = abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
    sub = {x: x0 + s * (x1 - x0) + t * (x2 - x0), y: y0 + s * (y1 - y0) + t * (y2 - y0)}
    inner = sym.integrate(sym.expand(expr.subs(sub, simultaneous=True)), (s, 0, 1 - t))
    return J * sym.integrate(inner, (t, 0, 1))


def _edge_integral(expr, a, b):
    L = sym.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2)
    sub = {x: a[0] + s * (b[0] - a[0]), y: a[1] + s * (b[1] - a[1])}
    return L * sym.integrate(sym.expand(expr.subs(sub, simultaneous=True)), (s, 0, 1))


def grad(f):
    return sym.Matrix([sym.diff(f, x), sym.diff(f, y)])


class OracleMesh:
    def __init__(self, vertices, elements):
        self.V = [tuple(sym.Rational(c) for c in v) for v in vertices]
        self.E = [tuple(e) for e in elements]
        edges = {}
        for k, e in enumerate(self.E):
            for i, j in ((0, 1), (1, 2), (2, 0)):
                key = tuple(sorted((e[i], e[j])))
                edges.setdefault(key, []).append(k)
        self.interior = []  # (a, b, k_minus, k_plus, n pointing minus -> plus)
        self.boundary = []  # (a, b, k, outward n)
        for (a, b), ks in sorted(edges.items()):
            ks = sorted(ks)
            n = self._normal(a, b, ks[0])
            if len(ks) == 2:
                self.interior.append((a, b, ks[0], ks[1], n))
            else:
                self.boundary.append((a, b, ks[0], n))

    def _normal(self, a, b, k):
        """Unit normal of edge (a, b) pointing out of element k."""
        A, B = self.V[a], self.V[b]
        d = (B[0] - A[0], B[1] - A[1])
        n = sym.Matrix([d[1], -d[0]]) / sym.sqrt(d[0] ** 2 + d[1] ** 2)
        C = [sum(self.V[v][i] for v in self.E[k]) / 3 for i in range(2)]
        if (C[0] - A[0]) * n[0] + (C[1] - A[1]) * n[1] > 0:
            n = -n
        return n

    def tri(self, k):
        return [self.V[v] for v in self.E[k]]

    def h(self, a, b):
        A, B = self.V[a], self.V[b]
        return sym.sqrt((B[0] - A[0]) ** 2 + (B[1] - A[1]) ** 2)

    # element-by-element sums -------------------------------------------------
    def vol(self, fn):
        return sum(_tri_integral(fn(k), self.tri(k)) for k in range(len(self.E)))


def random_poly(rng, deg):
    exps = [(i, j) for i in range(deg + 1) for j in range(deg + 1 - i)]
    return sum(sym.Rational(int(rng.integers(-9, 10)), 7) * x**i * y**j for i, j in exps)


def random_scalar(rng, mesh: OracleMesh, deg):
    return [random_poly(rng, deg) for _ in mesh.E]


def random_vector(rng, mesh: OracleMesh, deg):
    return [sym.Matrix([random_poly(rng, deg), random_poly(rng, deg)]) for _ in mesh.E]


# ---------------------------------------------------------------------- forms
def a_D(m: OracleMesh, c, chi, sigma):
    val = m.vol(lambda k: (grad(c[k]).T * grad(chi[k]))[0])
    for a, b, km, kp, n in m.interior:
        jc, jx = c[km] - c[kp], chi[km] - chi[kp]
        avg_c = ((grad(c[km]) + grad(c[kp])).T * n)[0] / 2
        avg_x = ((grad(chi[km]) + grad(chi[kp])).T * n)[0] / 2
        pen = sigma / m.h(a, b) * jc * jx
        val += _edge_integral(-avg_c * jx - avg_x * jc + pen, m.V[a], m.V[b])
    return val


def _vgrad_n(v, n):
    # (grad v) n as a column vector
    return sym.Matrix([(grad(v[i]).T * n)[0] for i in range(2)])


def a_eps(m: OracleMesh, v, th, sigma):
    val = m.vol(lambda k: sum((grad(v[k][i]).T * grad(th[k][i]))[0] for i in range(2)))
    faces = [(a, b, km, kp, n) for a, b, km, kp, n in m.interior]
    faces += [(a, b, k, None, n) for a, b, k, n in m.boundary]
    zero = sym.Matrix([0, 0])
    for a, b, km, kp, n in faces:
        vp = v[kp] if kp is not None else None
        tp = th[kp] if kp is not None else None
        jv = v[km] - (vp if vp is not None else zero)
        jt = th[km] - (tp if tp is not None else zero)
        if kp is None:
            av, at = _vgrad_n(v[km], n), _vgrad_n(th[km], n)
        else:
            av = (_vgrad_n(v[km], n) + _vgrad_n(vp, n)) / 2
            at = (_vgrad_n(th[km], n) + _vgrad_n(tp, n)) / 2
        integrand = -(av.T * jt)[0] - (at.T * jv)[0] + sigma / m.h(a, b) * (jv.T * jt)[0]
        val += _edge_integral(integrand, m.V[a], m.V[b])
    return val


def b_P(m: OracleMesh, p, th):
    div = lambda f: sym.diff(f[0], x) + sym.diff(f[1], y)
    val = m.vol(lambda k: -p[k] * div(th[k]))
    for a, b, km, kp, n in m.interior:
        jump = ((th[km] - th[kp]).T * n)[0]
        val += _edge_integral((p[km] + p[kp]) / 2 * jump, m.V[a], m.V[b])
    for a, b, k, n in m.boundary:
        val += _edge_integral(p[k] * (th[k].T * n)[0], m.V[a], m.V[b])
    return val


def a_A(m: OracleMesh, c, v, chi):
    val = m.vol(lambda k: -c[k] * (v[k].T * grad(chi[k]))[0])
    for a, b, km, kp, n in m.interior:
        avg_c = (c[km] + c[kp]) / 2
        avg_vn = (((v[km] + v[kp]) / 2).T * n)[0]
        val += _edge_integral(avg_c * avg_vn * (chi[km] - chi[kp]), m.V[a], m.V[b])
    return val


def b_I(m: OracleMesh, c, mu, th):
    val = m.vol(lambda k: -c[k] * (grad(mu[k]).T * th[k])[0])
    for a, b, km, kp, n in m.interior:
        avg_c = (c[km] + c[kp]) / 2
        avg_tn = (((th[km] + th[kp]) / 2).T * n)[0]
        val += _edge_integral(avg_c * (mu[km] - mu[kp]) * avg_tn, m.V[a], m.V[b])
    return val


def a_C(m: OracleMesh, w, z, th):
    """a_C(w, w, z, th); requires {w}.n_E to keep one sign on every face."""
    div = lambda f: sym.diff(f[0], x) + sym.diff(f[1], y)

    def vol(k):
        conv = sum(w[k][j] * sym.diff(z[k][i], (x, y)[j]) * th[k][i] for i in range(2) for j in range(2))
        return conv + sym.Rational(1, 2) * div(w[k]) * (z[k].T * th[k])[0]

    val = m.vol(vol)
    zero = sym.Matrix([0, 0])
    # element-local face loop for the upwind term
    for k in range(len(m.E)):
        sides = [(a, b, km if kp == k else kp, n if km == k else -n)
                 for a, b, km, kp, n in m.interior if k in (km, kp)]
        sides += [(a, b, None, n) for a, b, kk, n in m.boundary if kk == k]
        for a, b, other, nE in sides:
            wavg = (w[k] + w[other]) / 2 if other is not None else w[k]
            wn = (wavg.T * nE)[0]
            signs = {sym.sign(wn.subs({x: P[0], y: P[1]})) for P in (m.V[a], m.V[b])}
            assert len(signs) == 1 and 0 not in signs, "upwind sign must be constant on a face"
            if signs.pop() < 0:
                zext = z[other] if other is not None else zero
                val += _edge_integral(-wn * ((z[k] - zext).T * th[k])[0], m.V[a], m.V[b])
    # -1/2 sum_e [w.n_e] {z.th}
    for a, b, km, kp, n in m.interior:
        jw = ((w[km] - w[kp]).T * n)[0]
        avg = ((z[km].T * th[km])[0] + (z[kp].T * th[kp])[0]) / 2
        val += _edge_integral(-jw * avg / 2, m.V[a], m.V[b])
    for a, b, k, n in m.boundary:
        val += _edge_integral(-(w[k].T * n)[0] * (z[k].T * th[k])[0] / 2, m.V[a], m.V[b])
    return val


# ------------------------------------------------------------ to coefficients
def coefficients(space, polys) -> FieldCoefficients:
    """Exact coefficients of per-element polynomials (scalar list or list of 2-vectors)."""
    vec = hasattr(space, "scalar")
    sc = space.scalar if vec else space
    tab = sc.volume(3 * max(sc.degree, 1) + 3)
    comps = range(2) if vec else [None]
    out = []
    for comp in comps:
        block = np.zeros((sc.mesh.n_elements, sc.dofs_per_element))
        for k, p in enumerate(polys):
            expr = p[comp] if comp is not None else p
            f = sym.lambdify((x, y), expr, "numpy")
            vals = np.broadcast_to(np.asarray(f(tab.points[k, :, 0], tab.points[k, :, 1]), float),
                                   tab.weights[k].shape)
            block[k] = np.einsum("q,qn,q->n", tab.weights[k], tab.phi[k], vals)
        out.append(block.ravel())
    return FieldCoefficients(space, np.concatenate(out))


def as_float(v) -> float:
    return float(sym.N(v, 30))


__all__ = ["OracleMesh", "a_D", "a_eps", "b_P", "a_A", "b_I", "a_C", "coefficients",
           "random_scalar", "random_vector", "as_float"]
