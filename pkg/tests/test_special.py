import math

import mpmath
import numpy as np
import pytest

from bdfactor import special
from bdfactor.errors import DomainError


@pytest.mark.parametrize("s,x", [(1, 0.5), (5, 2.0), (31, 1.0), (2.5, 3.0), (0.7, 0.1)])
def test_incomplete_gamma(s, x):
    assert special.upper_inc_gamma(s, x) == pytest.approx(float(mpmath.gammainc(s, x, mpmath.inf)), rel=1e-13)
    assert special.lower_inc_gamma(s, x) == pytest.approx(float(mpmath.gammainc(s, 0, x)), rel=1e-13)


def test_incomplete_gamma_domain():
    with pytest.raises(DomainError):
        special.upper_inc_gamma(0, 1)
    with pytest.raises(DomainError):
        special.lower_inc_gamma(1, -1)


@pytest.mark.parametrize("x,a,b", [(0.3, 2.0, 0.5), (0.5, 1.0, 3.0), (0.9, 4.5, 2.0)])
def test_incomplete_beta(x, a, b):
    ref = mpmath.betainc(a, b, 0, x)
    assert special.inc_beta(x, a, b) == pytest.approx(float(ref), rel=1e-12)
    ref_c = mpmath.betainc(a, b, x, 1)
    assert special.inc_beta_complement(x, a, b) == pytest.approx(float(ref_c), rel=1e-12)


@pytest.mark.parametrize("a,b,c,z", [(1, 1, 2.5, 0.5), (0.5, 1.5, 3, -0.9), (1, -6, -8.5, 2.0),
                                     (1, 1, 3, 0.99)])
def test_gauss_2f1(a, b, c, z):
    assert special.gauss_2f1(a, b, c, z) == pytest.approx(float(mpmath.hyp2f1(a, b, c, z)), rel=1e-12)


def test_gauss_2f1_domain():
    with pytest.raises(DomainError):
        special.gauss_2f1(1, 1, 2, 1.5)


def test_dilog():
    for x in (-3.0, -0.5, 0.2, 0.9, 1.0):
        assert special.dilog(x) == pytest.approx(float(mpmath.polylog(2, x)), rel=1e-13)
    with pytest.raises(DomainError):
        special.dilog(1.5)


def test_classical_polynomials_against_mpmath(rng):
    x = rng.uniform(-1, 1, 20)
    for n in (0, 1, 5, 12):
        np.testing.assert_allclose(special.chebyshev_u(n, x), [float(mpmath.chebyu(n, v)) for v in x],
                                   rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(special.chebyshev_t(n, x), [float(mpmath.chebyt(n, v)) for v in x],
                                   rtol=1e-12, atol=1e-12)
    y = rng.uniform(0, 8, 20)
    for n in (0, 3, 9):
        np.testing.assert_allclose(special.laguerre(n, 1.5, y),
                                   [float(mpmath.laguerre(n, 1.5, v)) for v in y], rtol=1e-10, atol=1e-10)
        # Charlier and Meixner through their hypergeometric representations
        a = 1.7
        np.testing.assert_allclose(special.charlier(n, y, a),
                                   [float(mpmath.hyp2f0(-n, -v, -1 / a)) for v in y], rtol=1e-9, atol=1e-9)
        b, c = 2.5, 0.4
        np.testing.assert_allclose(special.meixner(n, y, b, c),
                                   [float(mpmath.hyp2f1(-n, -v, b, 1 - 1 / c)) for v in y], rtol=1e-9,
                                   atol=1e-9)


def test_pochhammer():
    assert special.pochhammer(2.5, 4) == pytest.approx(2.5 * 3.5 * 4.5 * 5.5)
    assert special.chebyshev_u(-1, 0.3) == 0.0
    assert math.isclose(special.upper_inc_gamma(3, 0.0), 2.0)
