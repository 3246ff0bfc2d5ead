"""Manufactured-solution convergence studies."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import sympy as sym

from .dgspace import DgVectorSpace, FieldCoefficients, face_traces, tabulate
from .forms import Discretization
from .mesh import structured_unit_square
from .potential import Potential
from .projections import Analytic
from .stepper import Forcing, SchemeParams, Stepper

X, Y, T = sym.symbols("x y t", real=True)


def _lam(expr):
    f = sym.lambdify((X, Y, T), expr, "numpy")

    def call(x, t=0.0):
        out = f(x[..., 0], x[..., 1], t)
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape[:-1]).copy()

    return call


def _lam_vec(exprs):
    fs = [_lam(e) for e in exprs]
    return lambda x, t=0.0: np.stack([f(x, t) for f in fs], axis=-1)


def _lam_grad_vec(exprs):
    # (..., component, derivative)
    fs = [[_lam(sym.diff(e, s)) for s in (X, Y)] for e in exprs]
    return lambda x, t=0.0: np.stack([np.stack([f(x, t) for f in row], axis=-1) for row in fs], axis=-2)


@dataclass
class ManufacturedCase:
    """Closed-form (c, mu, v, p) with the forcings they induce in the mass and momentum equations."""

    kappa: float
    mu_s: float
    exprs: dict
    c: Callable = field(init=False)
    c_grad: Callable = field(init=False)
    mu: Callable = field(init=False)
    mu_grad: Callable = field(init=False)
    v: Callable = field(init=False)
    v_grad: Callable = field(init=False)
    p: Callable = field(init=False)
    f_c: Callable = field(init=False)
    f_v: Callable = field(init=False)

    def __post_init__(self):
        e = self.exprs
        self.c = _lam(e["c"])
        self.c_grad = _lam_vec([sym.diff(e["c"], s) for s in (X, Y)])
        self.mu = _lam(e["mu"])
        self.mu_grad = _lam_vec([sym.diff(e["mu"], s) for s in (X, Y)])
        self.v = _lam_vec(e["v"])
        self.v_grad = _lam_grad_vec(e["v"])
        self.p = _lam(e["p"])
        self.f_c = _lam(e["f_c"])
        self.f_v = _lam_vec(e["f_v"])

    def forcing(self) -> Forcing:
        # every builtin f_c integrates to zero over the unit square
        return Forcing(self.f_c, self.f_v, mean_free_c=True)

    def c_at(self, t: float) -> Analytic:
        return Analytic(lambda x: self.c(x, t), lambda x: self.c_grad(x, t))

    def v_at(self, t: float):
        return lambda x: self.v(x, t)


def _derive(c, v, p, kappa, mu_s, potential_expr):
    s = sym.Symbol("s", real=True)
    dphi = sym.diff(potential_expr(s), s)
    lap = lambda f: sym.diff(f, X, 2) + sym.diff(f, Y, 2)
    mu = dphi.subs(s, c) - kappa * lap(c)
    div_cv = sym.diff(c * v[0], X) + sym.diff(c * v[1], Y)
    f_c = sym.diff(c, T) - lap(mu) + div_cv
    f_v = []
    for i, (d, vi) in enumerate(zip((X, Y), v)):
        conv = v[0] * sym.diff(vi, X) + v[1] * sym.diff(vi, Y)
        f_v.append(sym.diff(vi, T) + conv - mu_s * lap(vi) + sym.diff(p, d) + c * sym.diff(mu, d))
    return dict(c=c, mu=mu, v=list(v), p=p, f_c=f_c, f_v=f_v)


def _gl(s):
    return sym.Rational(1, 4) * (1 + s) ** 2 * (1 - s) ** 2


def builtin_case(kappa: float = 0.05, mu_s: float = 1.0, velocity_time=None) -> ManufacturedCase:
    """Unit-square case with Ginzburg-Landau potential.

    c = e^{-t} cos(pi x) cos(pi y)  (zero mean, zero normal derivative)
    v = curl(g(t) sin^2(pi x) sin^2(pi y))  (divergence free, zero trace)
    p = e^{-t} cos(pi x) cos(pi y)  (zero mean)

    ``velocity_time`` is g as a sympy expression in ``T`` (default e^{-t}).
    """
    pi = sym.pi
    et = sym.exp(-T)
    g = et if velocity_time is None else velocity_time
    c = et * sym.cos(pi * X) * sym.cos(pi * Y)
    psi = g * sym.sin(pi * X) ** 2 * sym.sin(pi * Y) ** 2
    v = (sym.diff(psi, Y), -sym.diff(psi, X))
    p = et * sym.cos(pi * X) * sym.cos(pi * Y)
    return ManufacturedCase(kappa, mu_s, _derive(c, v, p, kappa, mu_s, _gl))


def temporal_case(kappa: float = 0.05, mu_s: float = 0.1, omega: float = 10.0) -> ManufacturedCase:
    """Builtin case with an oscillating velocity amplitude cos(omega t).

    The fast time variation and small viscosity make the O(tau) error of
    the velocity dominate the spatial error on a 32 x 32 mesh.
    """
    return builtin_case(kappa, mu_s, velocity_time=sym.cos(omega * T))


def stationary_case(cbar: float = 0.3, kappa: float = 0.05, mu_s: float = 1.0) -> ManufacturedCase:
    """Spatially constant order parameter at rest; all forcings vanish."""
    c = sym.Float(cbar) + 0 * X
    return ManufacturedCase(kappa, mu_s, _derive(c, (0 * X, 0 * X), 0 * X, kappa, mu_s, _gl))


# ---------------------------------------------------------------------- errors
def error_norms(disc: Discretization, fh: FieldCoefficients, value, grad, deg: int):
    """(L2 error, DG error) of a discrete field against an exact continuous field.

    The exact field is continuous (and vanishes on the boundary for vectors),
    so jumps of the error are jumps of the discrete field.
    """
    vec = isinstance(fh.space, DgVectorSpace)
    sp = disc.S
    tab = sp.volume(deg)
    vh, gh = tabulate(fh, deg)
    ev = value(tab.points) - vh
    eg = grad(tab.points) - gh
    l2 = np.sum(tab.weights[..., None] * ev**2) if vec else np.sum(tab.weights * ev**2)
    axes = (2, 3) if vec else (2,)
    h1 = np.sum(tab.weights * np.sum(eg**2, axis=axes))
    ft = sp.interior(deg)
    (um, _), (up, _) = face_traces(fh, deg)
    j = (um - up) ** 2
    j = j.sum(axis=-1) if vec else j
    jumps = np.sum((disc.sigma / ft.h)[:, None] * ft.weights * j)
    if vec:
        bt = sp.boundary(deg)
        (ub, _), _ = face_traces(fh, deg, boundary=True)
        jumps += np.sum((disc.sigma / bt.h)[:, None] * bt.weights * (ub**2).sum(axis=-1))
    return math.sqrt(l2), math.sqrt(h1 + jumps)


@dataclass
class ConvergenceRow:
    n: int
    h: float
    tau: float
    err_c_dg: float
    err_v_l2: float
    err_v_dg_acc: float
    err_mu_dg_acc: float
    steps: int = 0


NORMS = ("err_c_dg", "err_v_l2", "err_v_dg_acc", "err_mu_dg_acc")


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow]
    by: str = "h"  # "h" for spatial studies, "tau" for temporal studies

    def eoc(self, norm: str) -> list[float | None]:
        """log2-type rate between successive rows; None where undefined."""
        out: list[float | None] = [None]
        for a, b in zip(self.rows, self.rows[1:]):
            ea, eb = getattr(a, norm), getattr(b, norm)
            ra, rb = getattr(a, self.by), getattr(b, self.by)
            if ea <= 1e-13 or eb <= 1e-13 or ra == rb:
                out.append(None)
            else:
                out.append(math.log(ea / eb) / math.log(ra / rb))
        return out

    def final_eoc(self, norm: str) -> float | None:
        return self.eoc(norm)[-1]

    def as_records(self) -> list[dict]:
        recs = []
        eocs = {k: self.eoc(k) for k in NORMS}
        for i, r in enumerate(self.rows):
            rec = dict(n=r.n, h=r.h, tau=r.tau, err_c_dg=r.err_c_dg, err_v_l2=r.err_v_l2,
                       err_v_dg_acc=r.err_v_dg_acc, err_mu_dg_acc=r.err_mu_dg_acc)
            for k in NORMS:
                rec["eoc_" + k[4:]] = "" if eocs[k][i] is None else eocs[k][i]
            recs.append(rec)
        return recs

    def write_csv(self, path) -> None:
        recs = self.as_records()
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(recs[0]))
            w.writeheader()
            w.writerows(recs)


def run_single(case: ManufacturedCase, n: int, q: int, tau: float, T_final: float,
               sigma: float | None = None, error_degree: int | None = None,
               potential: Potential | None = None, forced: bool = True) -> ConvergenceRow:
    mesh = structured_unit_square(n)
    disc = Discretization(mesh, q, sigma)
    params = SchemeParams(tau=tau, kappa=case.kappa, mu_s=case.mu_s,
                          potential=potential or Potential("ginzburg_landau"))
    stepper = Stepper(disc, params, case.forcing() if forced else None)
    deg = error_degree if error_degree is not None else disc.nonlinear_degree + 2
    state = stepper.initialize(case.c_at(0.0), case.v_at(0.0))
    N = int(round(T_final / tau))
    max_c = max_v = acc_v = acc_mu = 0.0
    for _ in range(N):
        state = stepper.step(state)
        t = state.t
        _, ec = error_norms(disc, state.c, lambda x: case.c(x, t), lambda x: case.c_grad(x, t), deg)
        _, em = error_norms(disc, state.mu, lambda x: case.mu(x, t), lambda x: case.mu_grad(x, t), deg)
        ev_l2, ev_dg = error_norms(disc, state.v, lambda x: case.v(x, t), lambda x: case.v_grad(x, t), deg)
        max_c = max(max_c, ec)
        max_v = max(max_v, ev_l2)
        acc_v += tau * ev_dg**2
        acc_mu += tau * em**2
    return ConvergenceRow(n, mesh.h_max, tau, max_c, max_v, math.sqrt(acc_v), math.sqrt(acc_mu), N)


def spatial_taus(ns: Sequence[int], T_final: float, factor: float = 0.1, q: int = 1) -> list[float]:
    """Largest tau <= factor * h^q that divides T_final."""
    out = []
    for n in ns:
        h = math.sqrt(2) / n
        N = math.ceil(T_final / (factor * h**q) - 1e-9)
        out.append(T_final / N)
    return out


def run_convergence(case: ManufacturedCase, q: int, ns: Sequence[int], taus: Sequence[float],
                    T_final: float, by: str = "h", **kw) -> ConvergenceTable:
    if len(ns) != len(taus):
        raise ValueError("need one tau per mesh")
    rows = [run_single(case, n, q, tau, T_final, **kw) for n, tau in zip(ns, taus)]
    return ConvergenceTable(rows, by=by)
