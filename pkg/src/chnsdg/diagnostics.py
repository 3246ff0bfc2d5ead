"""DG norms, discrete energy, mass functionals and eigenvalue probes of the
stability constants."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
import scipy.linalg as sla

from .dgspace import DgVectorSpace, FieldCoefficients, face_traces, tabulate
from .forms import Discretization
from .potential import Potential


@dataclass(frozen=True)
class EnergyReport:
    kinetic: float
    chemical: float
    interfacial: float

    @property
    def total(self) -> float:
        return self.kinetic + self.chemical + self.interfacial

    def as_dict(self) -> dict:
        return {**asdict(self), "total": self.total}


def dg_norm(f: FieldCoefficients, disc: Discretization) -> float:
    """Scalar: broken H1 seminorm + interior jumps; vector: also boundary traces."""
    G = disc.G_X if isinstance(f.space, DgVectorSpace) else disc.G_S
    val = float(f.coeffs @ (G @ f.coeffs))
    return float(np.sqrt(max(val, 0.0)))


def l2_norm(f: FieldCoefficients, disc: Discretization) -> float:
    M = disc.M_X if isinstance(f.space, DgVectorSpace) else disc.M_S
    return float(np.sqrt(max(f.coeffs @ (M @ f.coeffs), 0.0)))


def total_mass(c: FieldCoefficients) -> float:
    return float(c.space.mean_vector @ c.coeffs)


def discrete_energy(c: FieldCoefficients, v: FieldCoefficients, kappa: float,
                    potential: Potential, disc: Discretization) -> EnergyReport:
    """F_h = 1/2 (v, v) + (Phi(c), 1) + kappa/2 a_D(c, c)."""
    kin = 0.5 * float(v.coeffs @ (disc.M_X @ v.coeffs))
    chem = disc.integral(potential.phi, c)
    inter = 0.5 * kappa * float(c.coeffs @ (disc.A_D @ c.coeffs))
    return EnergyReport(kin, chem, inter)


def _complement_of(vec):
    """Orthonormal basis of the orthogonal complement of ``vec``."""
    return sla.null_space(vec[None, :])


def estimate_coercivity(A, G, kernel=None) -> float:
    """Smallest generalized eigenvalue of (A, G), optionally on the complement of ``kernel``.

    Returns the largest K with  x^T A x >= K x^T G x.
    """
    A = A.toarray() if hasattr(A, "toarray") else np.asarray(A)
    G = G.toarray() if hasattr(G, "toarray") else np.asarray(G)
    A = 0.5 * (A + A.T)
    if kernel is not None:
        Z = _complement_of(np.asarray(kernel, dtype=float))
        A = Z.T @ A @ Z
        G = Z.T @ G @ Z
    return float(sla.eigh(A, G, eigvals_only=True, subset_by_index=[0, 0])[0])


def coercivity_constants(disc: Discretization) -> tuple[float, float]:
    """(K_alpha for a_D on S_h modulo constants, K_eps for a_eps on X_h)."""
    k_alpha = estimate_coercivity(disc.A_D, disc.G_S, kernel=disc.S.constant_vector)
    k_eps = estimate_coercivity(disc.A_eps, disc.G_X)
    return k_alpha, k_eps


def estimate_infsup(disc: Discretization, pressure_space=None, zero_mean: bool = True,
                    velocity_basis=None) -> float:
    """Discrete inf-sup constant of b_P in the (L2, DG) norms.

    beta^2 is the smallest eigenvalue of  B G_X^{-1} B^T  relative to the
    pressure mass matrix, restricted to zero-mean pressures when requested.
    ``velocity_basis`` (nX x m) restricts the velocity space.
    """
    Pspace = disc.Q if pressure_space is None else pressure_space
    B = disc.B_P if pressure_space is None else disc.assemble_b_P(Pspace)
    B = B.toarray()
    G = disc.G_X.toarray()
    Mq = disc._mass(Pspace, 2 * disc.q).toarray()
    if velocity_basis is not None:
        W = np.asarray(velocity_basis, dtype=float)
        B = B @ W
        G = W.T @ G @ W
    L = sla.cho_factor(G)
    S = B @ sla.cho_solve(L, B.T)
    S = 0.5 * (S + S.T)
    if zero_mean:
        Z = _complement_of(Pspace.mean_vector)
        S = Z.T @ S @ Z
        Mq = Z.T @ Mq @ Z
    lam = sla.eigh(S, Mq, eigvals_only=True, subset_by_index=[0, 0])[0]
    return float(np.sqrt(max(lam, 0.0)))


def boundedness_ratio(disc: Discretization, c, v, chi) -> float:
    """|a_A(c, v, chi)| / ((|c|_DG + |int c|) |v|_DG |chi|_DG)."""
    num = abs(disc.a_A(c, v, chi))
    den = (dg_norm(c, disc) + abs(total_mass(c))) * dg_norm(v, disc) * dg_norm(chi, disc)
    return num / den


def elementwise_mass_balance(disc: Discretization, c_prev, c_new, mu, v, tau: float,
                             forcing=None) -> np.ndarray:
    """Per-element residual of the local mass balance obtained by testing the
    order-parameter equation with the indicator of one element:

        (1/tau) int_E (c^n - c^{n-1}) - int_dE {grad mu}.n_E + int_dE {c^{n-1}}{v^n}.n_E
          + (sigma/h_e) int_dE (mu_int - mu_ext) [- int_E f_c]  =  0

    Boundary faces carry no flux or penalty terms.  Computed directly by
    quadrature, independently of the assembled matrices.
    """
    m = disc.mesh
    deg = disc.rule_degree
    tabv = disc.S.volume(deg)
    cn, _ = tabulate(c_new, deg)
    co, _ = tabulate(c_prev, deg)
    res = np.einsum("kq,kq->k", tabv.weights, cn - co) / tau
    if forcing is not None:
        res -= np.einsum("kq,kq->k", tabv.weights, forcing(tabv.points))
    ft = disc.S.interior(deg)
    n = ft.normals
    (mum, gmm), (mup, gmp) = face_traces(mu, deg)
    (cm, _), (cp, _) = face_traces(c_prev, deg)
    (vm, _), (vp, _) = face_traces(v, deg)
    grad_flux = np.einsum("fqd,fd->fq", 0.5 * (gmm + gmp), n)
    adv_flux = 0.5 * (cm + cp) * np.einsum("fqd,fd->fq", 0.5 * (vm + vp), n)
    pen = (disc.sigma / ft.h)[:, None] * (mum - mup)
    # flux integrand on the minus side with n_E = n_e; the plus side sees n_E = -n_e
    g = np.einsum("fq,fq->f", ft.weights, -grad_flux + adv_flux + pen)
    np.add.at(res, ft.elem_minus, g)
    np.add.at(res, ft.elem_plus, -g)
    return res


def interior_element_mask(mesh) -> np.ndarray:
    mask = np.ones(mesh.n_elements, dtype=bool)
    mask[mesh.boundary_elements] = False
    return mask
