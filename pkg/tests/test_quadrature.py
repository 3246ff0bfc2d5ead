from math import factorial

import numpy as np
import pytest

from chnsdg.quadrature import interval_rule, triangle_rule


@pytest.mark.parametrize("deg", range(0, 13))
def test_triangle_exactness(deg):
    r = triangle_rule(deg)
    assert r.degree >= deg
    assert np.all(r.weights > 0)
    assert r.weights.sum() == pytest.approx(0.5, rel=1e-14)
    x, y = r.points.T
    for a in range(deg + 1):
        for b in range(deg + 1 - a):
            exact = factorial(a) * factorial(b) / factorial(a + b + 2)
            assert np.dot(r.weights, x**a * y**b) == pytest.approx(exact, rel=1e-13)


@pytest.mark.parametrize("deg", range(0, 13))
def test_interval_exactness(deg):
    r = interval_rule(deg)
    assert np.all(r.weights > 0)
    for a in range(deg + 1):
        assert np.dot(r.weights, r.points**a) == pytest.approx(1 / (a + 1), rel=1e-13)


def test_points_inside_reference():
    r = triangle_rule(9)
    lam = r.barycentric
    assert np.all(lam > 0) and np.allclose(lam.sum(axis=1), 1.0)
