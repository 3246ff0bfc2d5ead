import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chnsdg.dgspace import DgScalarSpace, FieldCoefficients, l2_project, tabulate
from chnsdg.diagnostics import (EnergyReport, coercivity_constants, dg_norm, discrete_energy,
                                estimate_coercivity, estimate_infsup, interior_element_mask,
                                total_mass)
from chnsdg.forms import Discretization
from chnsdg.mesh import structured_unit_square
from chnsdg.potential import Potential

from conftest import random_field

GL = Potential()


def _const(space, val):
    return l2_project(lambda x: np.broadcast_to(np.asarray(val, float), x.shape[:-1] + np.shape(val)), space)


def test_dg_norm_examples(disc4):
    assert dg_norm(_const(disc4.S, 3.0), disc4) <= 1e-12
    assert dg_norm(l2_project(lambda x: x[..., 0], disc4.S), disc4) == pytest.approx(1.0, rel=1e-12)
    e = _const(disc4.X, [1.0, 0.0])
    assert dg_norm(e, disc4) ** 2 == pytest.approx(disc4.sigma * disc4.mesh.n_boundary_faces, rel=1e-12)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_dg_norm_zero_iff_constant(seed):
    d = Discretization(structured_unit_square(2), 1)
    rng = np.random.default_rng(seed)
    f = random_field(d.S, rng)
    assert dg_norm(f, d) > 1e-6
    k = _const(d.S, rng.normal())
    # squared norm is at roundoff relative to the penalty-scaled Gram matrix
    assert dg_norm(k, d) ** 2 <= 1e-14 * abs(d.G_S).max() * (k.coeffs @ k.coeffs)


def test_total_mass(disc4):
    assert total_mass(_const(disc4.S, 0.3)) == pytest.approx(0.3, abs=1e-14)
    assert abs(total_mass(l2_project(lambda x: x[..., 0] - 0.5, disc4.S))) <= 1e-14


def test_energy_examples(disc4):
    zv = FieldCoefficients(disc4.X, np.zeros(disc4.nX))
    e1 = discrete_energy(_const(disc4.S, 1.0), zv, 0.01, GL, disc4)
    assert abs(e1.total) <= 1e-14
    e0 = discrete_energy(_const(disc4.S, 0.0), zv, 0.01, GL, disc4)
    assert e0.total == pytest.approx(0.25, rel=1e-13)


def test_energy_against_elevated_quadrature(disc4, rng):
    c = random_field(disc4.S, rng, 0.3)
    v = random_field(disc4.X, rng)
    e = discrete_energy(c, v, 0.02, GL, disc4)
    tab = disc4.S.volume(16)
    cv, _ = tabulate(c, 16)
    vv, _ = tabulate(v, 16)
    chem = np.sum(tab.weights * GL.phi(cv))
    kin = 0.5 * np.sum(tab.weights[..., None] * vv**2)
    assert e.chemical == pytest.approx(chem, abs=1e-10)
    assert e.kinetic == pytest.approx(kin, abs=1e-10)
    assert e.total == pytest.approx(e.kinetic + e.chemical + e.interfacial, abs=1e-12)
    assert e.interfacial >= 0
    assert set(e.as_dict()) == {"kinetic", "chemical", "interfacial", "total"}


def test_coercivity_identity_gram():
    A = np.diag([3.0, 1.5, 7.0])
    assert estimate_coercivity(A, np.eye(3)) == pytest.approx(1.5)


def test_coercivity_positive_default_sigma(disc4):
    ka, ke = coercivity_constants(disc4)
    assert ka > 0 and ke > 0


def test_small_sigma_reports_without_error():
    d = Discretization(structured_unit_square(4), 1, sigma=0.01)
    ka, _ = coercivity_constants(d)
    assert np.isfinite(ka) and ka < 0


def test_infsup_kernel_cases(disc4):
    assert estimate_infsup(disc4) > 0
    assert estimate_infsup(disc4, zero_mean=False) <= 1e-10
    # velocity restricted to constant vector fields
    one = _const(disc4.S, 1.0).coeffs
    W = np.zeros((disc4.nX, 2))
    W[: disc4.nS, 0] = one
    W[disc4.nS:, 1] = one
    assert estimate_infsup(disc4, velocity_basis=W) <= 1e-10


def test_interior_mask():
    m = structured_unit_square(3)
    mask = interior_element_mask(m)
    assert mask.sum() == m.n_elements - len(set(m.boundary_elements.tolist()))


def test_energy_report_total():
    assert EnergyReport(1.0, 2.0, 0.5).total == 3.5
