import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chnsdg.potential import Potential

GL = Potential("ginzburg_landau")
LOG = Potential("logarithmic", theta=1.0, theta_c=2.0)
VARIANTS = [GL, LOG, Potential("ginzburg_landau", trunc_radius=1.5),
            Potential("logarithmic", theta=0.3, theta_c=1.1, delta_trunc=0.1)]


def test_gl_values():
    assert GL.phi(1.0) == 0.0 and GL.phi(-1.0) == 0.0
    assert GL.phi(0.0) == 0.25
    assert GL.phi(0.5) == pytest.approx(9 / 64, abs=1e-15)
    assert GL.phi_plus(0.5) == pytest.approx(0.25 * (1 + 0.5**4))
    assert GL.phi_minus(0.5) == pytest.approx(-0.125)


def test_log_value_at_zero():
    assert LOG.phi(0.0) == pytest.approx(1 - math.log(2), abs=1e-14)
    assert LOG.phi(0.0) == pytest.approx(0.306853, abs=1e-6)


@pytest.mark.parametrize("pot", VARIANTS)
def test_split_sums(pot):
    c = np.linspace(-3, 3, 1001)
    assert np.allclose(pot.phi(c), pot.phi_plus(c) + pot.phi_minus(c), atol=1e-12)
    assert np.allclose(pot.dphi(c), pot.dphi_plus(c) + pot.dphi_minus(c), atol=1e-12)


@pytest.mark.parametrize("pot", VARIANTS)
def test_derivatives_match_finite_differences(pot):
    rng = np.random.default_rng(0)
    c = rng.uniform(-0.95, 0.95, 100)
    h = 1e-5
    for f, df in ((pot.phi_plus, pot.dphi_plus), (pot.phi_minus, pot.dphi_minus),
                  (pot.dphi_plus, pot.d2phi_plus), (pot.dphi_minus, pot.d2phi_minus)):
        fd = (f(c + h) - f(c - h)) / (2 * h)
        assert np.allclose(fd, df(c), atol=1e-6, rtol=1e-6)


@pytest.mark.parametrize("pot", VARIANTS)
def test_convex_concave_signs(pot):
    c = np.arange(-3, 3, 1e-3)
    assert np.all(pot.d2phi_plus(c) >= 0)
    assert np.all(pot.d2phi_minus(c) <= 0)
    assert np.all(np.diff(pot.dphi_plus(c)) >= 0)
    assert np.all(np.isfinite(pot.d2phi_minus(c)))


@pytest.mark.parametrize("pot", [LOG, VARIANTS[2], VARIANTS[3]])
def test_joint_smoothness(pot):
    r = pot._joint
    for a in (r, -r):
        for f in (pot.phi_plus, pot.dphi_plus, pot.d2phi_plus):
            left, right = f(a - 1e-13), f(a + 1e-13)
            assert abs(left - right) <= 1e-10


@given(st.floats(-10, 10, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_log_finite_everywhere(c):
    for f in (LOG.phi, LOG.dphi, LOG.d2phi_plus):
        assert np.isfinite(f(c))


def test_gl_untruncated_is_polynomial():
    c = np.array([2.0, -3.0])
    assert np.allclose(GL.dphi_plus(c), c**3)


@pytest.mark.parametrize("kw", [dict(kind="quartic"), dict(kind="logarithmic", theta=0),
                                dict(kind="logarithmic", delta_trunc=1.0),
                                dict(trunc_radius=-1.0)])
def test_validation(kw):
    with pytest.raises(ValueError):
        Potential(**kw)
