import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate as si
from scipy import special

from regenset import intersectlaw
from regenset.errors import NonIntersectingRegimeError, ValidationError
from regenset.intersectlaw import QuadratureConfig


def hyp_cdf(x, a, b1, b2):
    b12 = b1 + b2 - 1
    c = special.gamma(b2) / (special.gamma(b12) * special.gamma(2 - b1))
    return c * (a / x) ** (b1 - 1) * special.hyp2f1(1 - b1, b2, 2 - b1, -x / a)


@pytest.mark.parametrize("b1,b2", [(0.75, 0.75), (0.6, 0.9), (0.9, 0.6), (0.55, 0.5), (0.95, 0.95)])
@pytest.mark.parametrize("x", [0.01, 0.3, 1.0, 7.0, 250.0])
def test_cdf_matches_hypergeometric(b1, b2, x):
    assert intersectlaw.intersection_cdf(x, 1.3, b1, b2) == pytest.approx(hyp_cdf(x, 1.3, b1, b2), abs=1e-9)


def test_cdf_matches_scipy_quad():
    b1, b2, a, x = 0.7, 0.8, 1.0, 2.0
    b12 = b1 + b2 - 1
    f = lambda y: (a / x + y) ** (b1 - 1) * y ** (b2 - 1) * (1 - y) ** (-b12)
    ref = math.sin(math.pi * b12) / math.pi * si.quad(f, 0, 1, limit=200)[0]
    assert intersectlaw.intersection_cdf(x, a, b1, b2) == pytest.approx(ref, abs=1e-8)


def test_cdf_limits():
    assert intersectlaw.intersection_cdf(1e-12, 1.0, 0.75, 0.75) < 1e-2
    assert intersectlaw.intersection_cdf(1e30, 1.0, 0.75, 0.75) == pytest.approx(1.0, abs=1e-10)
    assert intersectlaw.intersection_cdf(np.inf, 1.0, 0.75, 0.75) == 1.0


def test_cdf_tail_decay():
    # 1 - P(D <= x) decays like x**-b12; the log-log slope approaches -b12
    x = np.array([1e6, 1e8])
    s = 1 - intersectlaw.intersection_cdf(x, 1.0, 0.75, 0.75)
    slope = math.log(s[1] / s[0]) / math.log(100)
    assert slope == pytest.approx(-0.5, abs=1e-3)


@given(st.floats(0.55, 0.95), st.floats(0.55, 0.95))
def test_cdf_monotone(b1, b2):
    xs = np.geomspace(0.01, 100, 12)
    c = intersectlaw.intersection_cdf(xs, 1.0, b1, b2)
    assert np.all(np.diff(c) >= -1e-10)
    assert np.all((c >= 0) & (c <= 1))


@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_cdf_scale_invariance(a, x):
    assert intersectlaw.intersection_cdf(x, a, 0.7, 0.8) == pytest.approx(
        intersectlaw.intersection_cdf(x / a, 1.0, 0.7, 0.8), abs=1e-9)


@pytest.mark.parametrize("b1,b2", [(0.3, 0.5), (0.7, 0.3), (0.4, 0.6)])
def test_non_intersecting_regime(b1, b2):
    with pytest.raises(NonIntersectingRegimeError):
        intersectlaw.intersection_cdf(1.0, 1.0, b1, b2)


def test_bad_inputs():
    with pytest.raises(ValidationError):
        intersectlaw.intersection_cdf(-1.0, 1.0, 0.8, 0.8)
    with pytest.raises(ValidationError):
        intersectlaw.intersection_cdf(1.0, 0.0, 0.8, 0.8)
    with pytest.raises(ValidationError):
        QuadratureConfig(abs_tol=0.0)


@pytest.mark.parametrize("b1,b2", [(0.6, 0.6), (0.75, 0.9), (0.9, 0.6)])
@pytest.mark.parametrize("x", [0.1, 1.0, 20.0])
def test_recursion_residual_small(b1, b2, x):
    assert intersectlaw.recursion_residual(x, b1, b2) < 1e-8


@pytest.mark.parametrize("beta,ell", [(0.5, 1), (0.6, 2), (2 / 3, 2), (0.75, 3), (0.8, 4), (0.9, 9), (0.99, 99)])
def test_ell_beta(beta, ell):
    assert intersectlaw.ell_beta(beta) == ell


def test_beta_star():
    assert intersectlaw.beta_star([0.8, 0.8, 0.8]) == pytest.approx(0.4)
    with pytest.raises(ValidationError):
        intersectlaw.beta_star([])


def test_shift_law_values():
    assert intersectlaw.shift_cdf_V(1.0, [0.75, 0.75]) == pytest.approx(math.pi / 4, abs=1e-12)
    assert intersectlaw.shift_cdf_V(0.0, [0.8, 0.8]) == 0.0
    assert intersectlaw.shift_cdf_V_normalized(1.0, [0.8, 0.8]) == pytest.approx(1.0)
    # one set: V has the shift law x**(1 - beta)
    assert intersectlaw.shift_cdf_V(0.3, [0.6]) == pytest.approx(0.3**0.4)
    with pytest.raises(NonIntersectingRegimeError):
        intersectlaw.shift_cdf_V(0.5, [0.6, 0.6, 0.6])
    with pytest.raises(ValidationError):
        intersectlaw.shift_cdf_V(1.5, [0.8, 0.8])
