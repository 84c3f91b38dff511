import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdfactor import factor_lu as lu
from bdfactor.checks import reconstruction_residual, relative_difference, row_sum_residual
from bdfactor.errors import InadmissibleMu0Hat
from bdfactor.examples import (linear, linear_lu_bound, linear_lu_coeffs_closed, mm1, mm1_lu_rates_closed,
                               mm1_lu_s_closed, mm_inf, mm_inf_lu_bound, mm_inf_lu_rates_closed)
from bdfactor.montecarlo import conditional_hitting_target, hitting_mean_target
from bdfactor.polynomials import primary
from bdfactor.process import build_ladder, q_at_zero_table
from bdfactor.special import chebyshev_u

PRESETS = [mm1(1, 2, 0), mm1(1, 2, 1), mm1(2, 1, 0), mm_inf(1, 1), linear(1, 1, 3), linear(1, 2, 1.5),
           linear(2, 1, 1)]


def test_bound_examples():
    assert lu.lu_admissible_upper_bound(mm1(1, 2, 0)) == pytest.approx(2.0, rel=1e-12)
    assert lu.lu_admissible_upper_bound(mm1(1, 2, 1)) == pytest.approx(2.0, rel=1e-12)
    assert lu.lu_admissible_upper_bound(mm_inf(1, 1)) == pytest.approx(1 / (1 - math.exp(-1)), rel=1e-12)
    assert lu.lu_admissible_upper_bound(mm_inf(3, 2)) == pytest.approx(mm_inf_lu_bound(3, 2), rel=1e-12)
    for lam, mu, beta in [(1, 2, 1.5), (2, 1, 1.0), (1, 1, 3.0)]:
        assert lu.lu_admissible_upper_bound(linear(lam, mu, beta)) == pytest.approx(
            linear_lu_bound(lam, mu, beta), rel=1e-10)


def test_factorize_examples():
    f = lu.lu_factorize(mm1(1, 2, 0), 0.0, 10)
    np.testing.assert_allclose(f.s_tilde[:5], [1, 3, 7, 15, 31], rtol=1e-13)
    assert f.r_tilde[1] == pytest.approx(-2.0)
    assert f.x_tilde[1] == pytest.approx(1 / 3)
    np.testing.assert_allclose(f.y_tilde, -f.x_tilde)
    p = mm1(1, 2, 0)
    f = lu.lu_factorize(p, 1.0, 20)
    pi = build_ladder(p, 20).pi()
    np.testing.assert_allclose(f.s_tilde, 1 / pi, rtol=1e-12)
    np.testing.assert_allclose(f.x_tilde, pi, rtol=1e-12)
    np.testing.assert_allclose(f.y_tilde, -pi, rtol=1e-12)
    f = lu.lu_factorize(p, 2.0, 200)
    np.testing.assert_allclose(f.s_tilde, 1.0, rtol=1e-10)


def test_system_identities():
    for p in PRESETS:
        b = lu.lu_admissible_upper_bound(p)
        for frac in (0.0, 0.3, 0.7, 1.0):
            f = lu.lu_factorize(p, frac * b, 40)
            n = np.arange(1, 41)
            assert f.s_tilde[0] == 1.0
            np.testing.assert_allclose(f.s_tilde * f.x_tilde, p.lam(np.arange(41)), rtol=1e-10)
            np.testing.assert_allclose(f.r_tilde[1:] * f.y_tilde[:-1], p.mu(n), rtol=1e-10)
            diag = f.r_tilde[1:] * f.x_tilde[:-1] + f.s_tilde[1:] * f.y_tilde[1:]
            np.testing.assert_allclose(diag, -(p.lam(n) + p.mu(n)), rtol=1e-10)
            assert np.all(f.q_tilde[~np.isnan(f.q_tilde)] < 0)
            # t = s + r cancels when s grows like 1/pi, so compare on the scale of s
            gap = np.abs(f.t_tilde[1:] - f.s_tilde[1:] - f.r_tilde[1:])
            assert np.all(gap <= 1e-10 * f.s_tilde[1:])
            assert np.all(f.s_tilde > 0)


def test_rejection_above_bound():
    with pytest.raises(InadmissibleMu0Hat):
        lu.lu_factorize(mm1(1, 2, 0), 2 * (1 + 1e-6), 200)
    with pytest.raises(InadmissibleMu0Hat):
        lu.lu_factorize(mm1(1, 2, 0), -0.1, 10)


def test_darboux_examples():
    f = lu.lu_factorize(mm1(1, 2, 0), 0.0, 45)
    lam, mu = f.darboux_rates()
    assert lam[0] == pytest.approx(3.0)
    assert lam[1] == pytest.approx(7 / 3)
    assert mu[1] == pytest.approx(2 / 3)
    np.testing.assert_allclose(lam[1:41] + mu[1:41], 3.0, rtol=1e-12)
    for n in range(41):
        lh, mh = mm1_lu_rates_closed(1, 2, n)
        assert lam[n] == pytest.approx(lh, rel=1e-12) and mu[n + 1] == pytest.approx(mh, rel=1e-12)
    d = lu.lu_darboux(mm1(1, 2, 0), 1.0, 30)
    n = np.arange(25)
    np.testing.assert_allclose(d.lam(n), 2.0, rtol=1e-12)
    np.testing.assert_allclose(d.mu(n + 1), 1.0, rtol=1e-12)
    f = lu.lu_factorize(mm_inf(1, 1), 0.0, 35)
    lam, mu = f.darboux_rates()
    assert lam[0] == pytest.approx(2.0) and mu[1] == pytest.approx(0.5)
    for n in range(31):
        lh, mh = mm_inf_lu_rates_closed(1, 1, n)
        assert lam[n] == pytest.approx(lh, rel=1e-10) and mu[n + 1] == pytest.approx(mh, rel=1e-10)


def test_mm1_absorbing_closed_form():
    p = mm1(1, 2, 1)
    for mh in (0.0, 0.7, 2.0):
        f = lu.lu_factorize(p, mh, 40)
        ref = [mm1_lu_s_closed(1, 2, mh, n) for n in range(41)]
        np.testing.assert_allclose(f.s_tilde, ref, rtol=1e-11)


def test_linear_closed_coefficients():
    for lam, mu, beta in [(1, 2, 1.5), (2, 1, 1.0), (1, 1, 3.0), (2, 1, 2.5)]:
        p = linear(lam, mu, beta)
        b = lu.lu_admissible_upper_bound(p)
        for frac in (0.0, 0.5, 1.0):
            f = lu.lu_factorize(p, frac * b, 30)
            for n in range(31):
                c = linear_lu_coeffs_closed(lam, mu, beta, frac * b, n)
                assert f.s_tilde[n] == pytest.approx(c.s, rel=1e-9)
                if n:
                    assert f.r_tilde[n] == pytest.approx(c.r, rel=1e-9)
    f = lu.lu_factorize(linear(1, 1, 3), 0.0, 60)
    np.testing.assert_allclose(f.s_tilde, 1 + np.arange(61) / 3, rtol=1e-14)


def test_probabilistic_identities():
    p = mm1(1, 3, 0)
    f = lu.lu_factorize(p, 0.0, 30)
    ref = [p.lam(n) * hitting_mean_target(p, n) for n in range(31)]
    np.testing.assert_allclose(f.s_tilde, ref, rtol=1e-12)
    p = mm1(1, 2, 1)
    f = lu.lu_factorize(p, 0.0, 30)
    q = q_at_zero_table(p, 31)
    ref = [p.lam(n) * conditional_hitting_target(p, n) / (q[0] / q[n + 1]) for n in range(31)]
    np.testing.assert_allclose(f.s_tilde, ref, rtol=1e-10)


def test_dual_path_agreement():
    for p in PRESETS:
        b = lu.lu_admissible_upper_bound(p)
        for frac in (0.0, 0.5, 1.0):
            f = lu.lu_factorize(p, frac * b, 60)
            g = lu.lu_factorize_recursive(p, frac * b, 60, at_bound=f.at_bound)
            for k in ("s_tilde", "r_tilde", "x_tilde", "y_tilde"):
                assert relative_difference(getattr(f, k), getattr(g, k)) <= 1e-10


def test_reconstruction_and_row_sums():
    for p in PRESETS:
        b = lu.lu_admissible_upper_bound(p)
        f = lu.lu_factorize(p, 0.6 * b, 50)
        assert reconstruction_residual(p, f.lower(), f.upper(), 50, relative=True) <= 1e-12
        assert row_sum_residual(f.upper(), f.lower(), 0.6 * b, 49) <= 1e-9


def test_transformed_poly():
    p = mm1(1, 2, 0)
    f = lu.lu_factorize(p, 0.0, 10)
    fam = lu.LUTransformedFamily(f)
    assert fam.eval(0, 1.7) == 1.0
    x = 1.3
    q = primary(p).table(5, x)
    assert fam.eval(3, x) == pytest.approx((f.x_tilde[3] * q[4] + f.y_tilde[3] * q[3]) / -x, rel=1e-12)
    assert lu.lu_transformed_poly(p, 0.0, 3, 0.0) == pytest.approx(f.s_tilde[3] * 0 + fam.eval(3, 0.0))
    # Chebyshev-U shape: ratio to U_n of the shifted argument is the same for every x
    xs = np.array([0.4, 1.1, 2.5, 4.2])
    y = (3 - xs) / (2 * math.sqrt(2))
    for n in range(1, 8):
        ratio = fam.eval(n, xs) / chebyshev_u(n, y)
        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-10)
    # recurrence with the Darboux rates
    d = lu.darboux_process(f)
    np.testing.assert_allclose(fam.table(8, xs), primary(d).table(8, xs), rtol=1e-10, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 3), st.floats(0.3, 3), st.floats(0, 2), st.floats(0, 1))
def test_mm1_grid_property(lam, mu, mu0, frac):
    p = mm1(lam, mu, mu0)
    b = lu.lu_admissible_upper_bound(p)
    f = lu.lu_factorize(p, frac * b, 40)
    assert np.all(f.s_tilde > 0)
    assert reconstruction_residual(p, f.lower(), f.upper(), 40, relative=True) <= 1e-9
