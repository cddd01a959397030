import math

import numpy as np
import pytest
from scipy import integrate as si

from regenset import quadrature
from regenset.errors import QuadratureError


@pytest.mark.parametrize("deg", [0, 5, 13, 22])
def test_kronrod_exact_polynomials(deg):
    v, _ = quadrature.gauss_kronrod(lambda t: t**deg, 0.0, 1.0, abs_tol=1e-14, initial=1)
    assert v == pytest.approx(1.0 / (deg + 1), abs=1e-14)


@pytest.mark.parametrize("f,a,b", [
    (np.sin, 0.0, math.pi),
    (lambda t: t**-0.5, 0.0, 1.0),
    (lambda t: np.exp(-t) * np.log(t), 0.0, 30.0),
    (lambda t: 1.0 / (1.0 + 25 * t**2), -1.0, 1.0),
])
def test_matches_scipy_quad(f, a, b):
    ref = si.quad(f, a, b, limit=500, epsabs=1e-13)[0]
    v, err = quadrature.gauss_kronrod(f, a, b, abs_tol=1e-9, max_refinements=500)
    assert abs(v - ref) < 1e-8
    assert err < 1e-9


def test_vector_valued():
    s = np.array([0.5, 1.0, 2.0])[:, None]
    v, _ = quadrature.gauss_kronrod(lambda t: np.exp(-s * t), 0.0, 1.0, abs_tol=1e-12)
    assert np.allclose(v, (1 - np.exp(-s[:, 0])) / s[:, 0], atol=1e-12)


def test_gives_up_on_nonintegrable():
    with pytest.raises(QuadratureError):
        quadrature.gauss_kronrod(lambda t: 1.0 / t, 0.0, 1.0, abs_tol=1e-10, max_refinements=30)
