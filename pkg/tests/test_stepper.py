import math

import numpy as np
import pytest

from chnsdg import initial_data
from chnsdg.dgspace import FieldCoefficients, l2_project
from chnsdg.forms import Discretization
from chnsdg.mesh import structured_unit_square
from chnsdg.potential import Potential
from chnsdg.projections import Analytic
from chnsdg.stepper import NewtonDivergence, SchemeParams, Stepper, initialize, run, step
from chnsdg.verify_mms import builtin_case

from conftest import random_field

PI = math.pi


@pytest.fixture(scope="module")
def disc():
    return Discretization(structured_unit_square(4), 1)


def _stepper(disc, **kw):
    return Stepper(disc, SchemeParams(**{"tau": 1e-2, **kw}))


def test_initialize_cases(disc):
    st = initialize(disc, SchemeParams(tau=0.1), initial_data.constant(0.4))
    const = l2_project(lambda x: np.full(x.shape[:-1], 0.4), disc.S)
    assert np.abs(st.c.coeffs - const.coeffs).max() <= 1e-12
    assert np.all(st.v.coeffs == 0)
    assert st.mu is None and st.p is None
    cc = Analytic(lambda x: np.cos(PI * x[..., 0]) * np.cos(PI * x[..., 1]))
    st = initialize(disc, SchemeParams(tau=0.1), cc)
    assert abs(st.diagnostics["mass"]) <= 1e-12


@pytest.mark.parametrize("kind", ["ginzburg_landau", "logarithmic"])
def test_stationary_fixed_point(disc, kind):
    pot = Potential(kind)
    s = _stepper(disc, potential=pot)
    st0 = s.initialize(initial_data.constant(0.3))
    st1 = s.step(st0)
    assert np.abs(st1.c.coeffs - st0.c.coeffs).max() <= 1e-12
    assert np.abs(st1.v.coeffs).max() <= 1e-12
    mu_exact = float(pot.dphi_plus(0.3) + pot.dphi_minus(0.3))
    target = l2_project(lambda x: np.full(x.shape[:-1], mu_exact), disc.S)
    assert np.abs(st1.mu.coeffs - target.coeffs).max() <= 1e-11
    assert st1.diagnostics["newton_iters"] <= 2


def test_run_trivial_cases(disc):
    s = _stepper(disc)
    st0 = s.initialize(initial_data.constant(-0.2))
    assert s.run(st0, 0.0) == [st0]
    traj = s.run(st0, 0.1)
    assert len(traj) == 11
    for st in traj[1:]:
        assert np.abs(st.c.coeffs - st0.c.coeffs).max() <= 1e-12
    with pytest.raises(ValueError):
        s.run(st0, 0.105)


@pytest.mark.parametrize("tau", [1e-3, 1e-1, 10.0])
def test_mass_and_energy_short(disc, tau):
    s = _stepper(disc, tau=tau)
    traj = s.run(s.initialize(initial_data.spinodal(3, 0.05)), 3 * tau)
    m = [st.diagnostics["mass"] for st in traj]
    F = [st.diagnostics["F_total"] for st in traj]
    assert max(abs(x - m[0]) for x in m) <= 1e-12
    assert all(b <= a + 1e-10 for a, b in zip(F, F[1:]))


def test_constraints_hold(disc):
    s = _stepper(disc, tau=0.05)
    st = s.step(s.initialize(initial_data.spinodal(1, 0.1)))
    assert abs(disc.Q.mean_vector @ st.p.coeffs) <= 1e-11
    assert np.abs(disc.B_P @ st.v.coeffs).max() <= 1e-10
    assert st.diagnostics["residual"] <= 1e-10


def test_step_residuals_match_equations(disc, rng):
    # re-evaluate each equation of the scheme with the evaluators on the solved state
    prm = SchemeParams(tau=0.05)
    s = Stepper(disc, prm)
    st0 = s.initialize(initial_data.spinodal(2, 0.1))
    st0.v = random_field(disc.X, rng, 0.1)
    st1 = s.step(st0)
    tau, pot = prm.tau, prm.potential
    r_c = disc.M_S @ (st1.c.coeffs - st0.c.coeffs) / tau + disc.A_D @ st1.mu.coeffs \
        + disc.assemble_a_A(st0.c) @ st1.v.coeffs
    r_mu = disc.potential_vector(pot.dphi_plus, st1.c) + disc.potential_vector(pot.dphi_minus, st0.c) \
        + prm.kappa * disc.A_D @ st1.c.coeffs - disc.M_S @ st1.mu.coeffs
    r_v = disc.M_X @ (st1.v.coeffs - st0.v.coeffs) / tau + disc.assemble_a_C(st0.v) @ st1.v.coeffs \
        + prm.mu_s * disc.A_eps @ st1.v.coeffs + disc.B_P.T @ st1.p.coeffs \
        - disc.assemble_b_I(st0.c) @ st1.mu.coeffs
    for r in (r_c, r_mu, r_v):
        assert np.abs(r).max() <= 1e-8


def test_potential_jacobian_fd(disc, rng):
    pot = Potential("logarithmic")
    c = random_field(disc.S, rng, 0.1)
    c.coeffs[:: disc.S.dofs_per_element] += 0.2
    J = disc.potential_jacobian(pot.d2phi_plus, c).toarray()
    h = 1e-6
    fd = np.empty_like(J)
    for j in range(disc.nS):
        e = np.zeros(disc.nS)
        e[j] = h
        fp = disc.potential_vector(pot.dphi_plus, FieldCoefficients(disc.S, c.coeffs + e))
        fm = disc.potential_vector(pot.dphi_plus, FieldCoefficients(disc.S, c.coeffs - e))
        fd[:, j] = (fp - fm) / (2 * h)
    assert np.linalg.norm(fd - J) / np.linalg.norm(J) <= 1e-5


def test_newton_divergence(disc):
    s = Stepper(disc, SchemeParams(tau=1.0, newton_maxit=1, newton_atol=1e-30, newton_rtol=1e-30))
    with pytest.raises(NewtonDivergence):
        s.step(s.initialize(initial_data.spinodal(0, 0.5)))


def test_forced_mass_conservation():
    case = builtin_case()
    d = Discretization(structured_unit_square(4), 1)
    s = Stepper(d, SchemeParams(tau=0.02, kappa=case.kappa, mu_s=case.mu_s), case.forcing())
    traj = s.run(s.initialize(case.c_at(0.0), case.v_at(0.0)), 0.1)
    m = [st.diagnostics["mass"] for st in traj]
    assert max(abs(x - m[0]) for x in m) <= 1e-12


def test_module_level_wrappers(disc):
    prm = SchemeParams(tau=0.1)
    st0 = initialize(disc, prm, initial_data.constant(0.1))
    st1 = step(st0, disc, prm)
    assert st1.n == 1 and st1.t == pytest.approx(0.1)
    assert len(run(st0, disc, prm, 0.2)) == 3


@pytest.mark.parametrize("kw", [dict(tau=0), dict(tau=1, kappa=-1), dict(tau=1, mu_s=float("nan")),
                                dict(tau=1, newton_maxit=0)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        SchemeParams(**kw)
