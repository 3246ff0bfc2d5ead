"""Fully discrete convex-concave splitting scheme: backward Euler in time,
Picard-lagged transport coefficients, monolithic Newton solve per step."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dgspace import FieldCoefficients, l2_project
from .diagnostics import discrete_energy, dg_norm, total_mass
from .forms import Discretization
from .potential import Potential
from .projections import EllipticProjector, SingularSystemError

log = logging.getLogger(__name__)


class NewtonDivergence(RuntimeError):
    pass


@dataclass(frozen=True)
class SchemeParams:
    tau: float
    kappa: float = 0.01
    mu_s: float = 1.0
    potential: Potential = field(default_factory=Potential)
    newton_atol: float = 1e-10
    newton_rtol: float = 1e-12
    newton_maxit: int = 30
    max_halvings: int = 8

    def __post_init__(self):
        for name in ("tau", "kappa", "mu_s"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive, got {val!r}")
        if self.newton_maxit < 1:
            raise ValueError("newton_maxit must be >= 1")


@dataclass(frozen=True)
class Forcing:
    """Source terms f_c(x, t) and f_v(x, t) for manufactured solutions.

    With ``mean_free_c`` the discrete load of f_c is shifted by a constant so
    its integral vanishes exactly; use it only when the exact integral of f_c
    is zero, so the shift removes nothing but quadrature error.
    """

    f_c: Callable
    f_v: Callable
    mean_free_c: bool = False


@dataclass
class TimeStepState:
    n: int
    t: float
    c: FieldCoefficients
    v: FieldCoefficients
    mu: FieldCoefficients | None = None
    p: FieldCoefficients | None = None
    diagnostics: dict = field(default_factory=dict)


class Stepper:
    """Owns the discretization-level frozen operators; one step in flight at a time."""

    def __init__(self, disc: Discretization, params: SchemeParams, forcing: Forcing | None = None):
        self.disc = disc
        self.params = params
        self.forcing = forcing
        self._projector = None

    # ------------------------------------------------------------------ setup
    @property
    def projector(self) -> EllipticProjector:
        if self._projector is None:
            self._projector = EllipticProjector(self.disc)
        return self._projector

    def initialize(self, c0, v0=None, t0: float = 0.0) -> TimeStepState:
        """c_h^0 = elliptic projection of c0, v_h^0 = L2 projection of v0."""
        disc = self.disc
        c = self.projector.project(c0)
        if v0 is None:
            v = FieldCoefficients(disc.X, np.zeros(disc.nX))
        else:
            v = l2_project(v0, disc.X, disc.nonlinear_degree)
        state = TimeStepState(0, t0, c, v)
        self._record(state, newton_iters=0, residual=0.0)
        return state

    def _record(self, state, **extra):
        disc, prm = self.disc, self.params
        e = discrete_energy(state.c, state.v, prm.kappa, prm.potential, disc)
        d = dict(
            mass=total_mass(state.c),
            F_total=e.total, F_kinetic=e.kinetic, F_chemical=e.chemical,
            F_interfacial=e.interfacial,
            mu_dg=dg_norm(state.mu, disc) if state.mu is not None else 0.0,
            v_dg=dg_norm(state.v, disc),
        )
        d.update(extra)
        state.diagnostics = d

    # ------------------------------------------------------------------ system
    def _blocks(self, prev: TimeStepState):
        disc, prm = self.disc, self.params
        tau = prm.tau
        A_A = disc.assemble_a_A(prev.c)
        B_I = disc.assemble_b_I(prev.c)
        A_C = disc.assemble_a_C(prev.v)
        mq = sp.csr_matrix(disc.Q.mean_vector[:, None])
        K_v = disc.M_X + tau * (A_C + prm.mu_s * disc.A_eps)
        # everything except the Phi_plus' Jacobian in the (mu-row, c-col) slot
        rows = [
            [disc.M_S, tau * disc.A_D, tau * A_A, None, None],
            [prm.kappa * disc.A_D, -disc.M_S, None, None, None],
            [None, -tau * B_I, K_v, tau * disc.B_P.T, None],
            [None, None, tau * disc.B_P, None, mq],
            [None, None, None, mq.T, None],
        ]
        return rows

    def _sizes(self):
        d = self.disc
        return np.cumsum([0, d.nS, d.nS, d.nX, d.nQ, 1])

    def _split(self, U):
        o = self._sizes()
        return [U[o[i]:o[i + 1]] for i in range(5)]

    def step(self, prev: TimeStepState, guess: np.ndarray | None = None) -> TimeStepState:
        disc, prm = self.disc, self.params
        tau = prm.tau
        pot = prm.potential
        t_new = prev.t + tau
        rows = self._blocks(prev)
        L = sp.bmat(rows, format="csr")  # linear part (without Phi_plus')
        rhs = np.zeros(L.shape[0])
        o = self._sizes()
        rhs[o[0]:o[1]] = disc.M_S @ prev.c.coeffs
        rhs[o[1]:o[2]] = -disc.potential_vector(pot.dphi_minus, prev.c)
        rhs[o[2]:o[3]] = disc.M_X @ prev.v.coeffs
        if self.forcing is not None:
            load_c = disc.load_vector(self.forcing.f_c, disc.S, t_new)
            if self.forcing.mean_free_c:
                m = disc.S.mean_vector
                load_c -= (m @ load_c) / (m @ m) * m
            rhs[o[0]:o[1]] += tau * load_c
            rhs[o[2]:o[3]] += tau * disc.load_vector(self.forcing.f_v, disc.X, t_new)

        def residual(U):
            r = L @ U - rhs
            r[o[1]:o[2]] += disc.potential_vector(pot.dphi_plus, disc.scalar_field(U[o[0]:o[1]]))
            return r

        if guess is None:
            U = np.zeros(L.shape[0])
            U[o[0]:o[1]] = prev.c.coeffs
            U[o[2]:o[3]] = prev.v.coeffs
            if prev.mu is not None:
                U[o[1]:o[2]] = prev.mu.coeffs
            if prev.p is not None:
                U[o[3]:o[4]] = prev.p.coeffs
        else:
            U = np.array(guess, dtype=float)

        R = residual(U)
        r0 = np.linalg.norm(R, np.inf)
        rnorm = r0
        tol = max(prm.newton_atol, prm.newton_rtol * r0)
        it = 0
        while rnorm > tol:
            if it >= prm.newton_maxit:
                raise NewtonDivergence(
                    f"Newton did not converge in {prm.newton_maxit} iterations "
                    f"(step {prev.n + 1}, residual {rnorm:.3e})")
            Jc = disc.potential_jacobian(pot.d2phi_plus, disc.scalar_field(U[o[0]:o[1]]))
            rows_j = [list(r) for r in rows]
            rows_j[1][0] = rows[1][0] + Jc
            J = sp.bmat(rows_j, format="csc")
            try:
                dU = spla.splu(J).solve(-R)
            except RuntimeError as exc:
                raise SingularSystemError(f"singular Newton system: {exc}") from exc
            if not np.all(np.isfinite(dU)):
                raise SingularSystemError("non-finite Newton update")
            lam = 1.0
            for _ in range(prm.max_halvings + 1):
                U_try = U + lam * dU
                R_try = residual(U_try)
                r_try = np.linalg.norm(R_try, np.inf)
                if r_try < rnorm or r_try <= tol:
                    break
                lam *= 0.5
            U, R, rnorm = U_try, R_try, r_try
            it += 1
            log.debug("step %d newton %d |R| = %.3e (lambda=%g)", prev.n + 1, it, rnorm, lam)

        c, mu, v, p, _ = self._split(U)
        state = TimeStepState(
            prev.n + 1, t_new,
            disc.scalar_field(c), disc.vector_field(v),
            disc.scalar_field(mu), disc.pressure_field(p),
        )
        self._record(state, newton_iters=it, residual=float(rnorm))
        return state

    def run(self, initial: TimeStepState, T_final: float, callback=None) -> list[TimeStepState]:
        """Advance N = T_final / tau steps; returns the trajectory including ``initial``."""
        tau = self.params.tau
        N = int(round(T_final / tau))
        if N < 0 or abs(N * tau - T_final) > 1e-9 * max(1.0, abs(T_final)):
            raise ValueError(f"T_final={T_final} is not an integer multiple of tau={tau}")
        traj = [initial]
        if callback is not None:
            callback(initial)
        state = initial
        for _ in range(N):
            state = self.step(state)
            traj.append(state)
            if callback is not None:
                callback(state)
        return traj

    def with_params(self, **kw) -> Stepper:
        return Stepper(self.disc, replace(self.params, **kw), self.forcing)

    def pack(self, state: TimeStepState) -> np.ndarray:
        """Monolithic unknown vector of a solved state (multiplier set to 0)."""
        parts = [state.c.coeffs, state.mu.coeffs, state.v.coeffs, state.p.coeffs, [0.0]]
        return np.concatenate(parts)


def initialize(disc: Discretization, params: SchemeParams, c0, v0=None) -> TimeStepState:
    return Stepper(disc, params).initialize(c0, v0)


def step(prev: TimeStepState, disc: Discretization, params: SchemeParams,
         forcing: Forcing | None = None) -> TimeStepState:
    return Stepper(disc, params, forcing).step(prev)


def run(initial: TimeStepState, disc: Discretization, params: SchemeParams, T_final: float,
        forcing: Forcing | None = None) -> list[TimeStepState]:
    return Stepper(disc, params, forcing).run(initial, T_final)
