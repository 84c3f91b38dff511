import json
import math

import mpmath
import numpy as np
import pytest

from bdfactor import factor_lu as lu
from bdfactor import factor_ul as ul
from bdfactor import special
from bdfactor.errors import DomainError
from bdfactor.examples import (linear, linear_A_closed, linear_B_closed, linear_dilog_bound,
                               linear_lu_coeffs_closed, linear_measure, linear_ul_case_report,
                               load_process_spec, make_preset, mm1, mm1_lu_rates_closed, mm1_measure,
                               mm1_support, mm_inf, mm_inf_lu_bound, mm_inf_lu_rates_closed)
from bdfactor.process import series_A, series_B


def test_mm1_measure_examples():
    m = mm1_measure(1, 2, 0)
    assert m.atom_loc.tolist() == [0.0]
    assert m.atom_mass[0] == pytest.approx(0.5, rel=1e-14)
    a, b = mm1_support(1, 2)
    assert a == pytest.approx(3 - 2 * math.sqrt(2)) and b == pytest.approx(3 + 2 * math.sqrt(2))
    assert len(mm1_measure(1, 2, 2).atom_loc) == 0
    assert mm1_measure(1, 2, 2).total_mass() == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 3.5])
@pytest.mark.parametrize("mu", [0.7, 1.0, 2.5])
@pytest.mark.parametrize("mu0", [0.0, 0.3, 1.0, 4.0])
def test_mm1_mass_grid(lam, mu, mu0):
    m = mm1_measure(lam, mu, mu0)
    assert m.total_mass() == pytest.approx(1.0, abs=1e-8)
    a, b = mm1_support(lam, mu)
    assert np.all((m.atom_loc < a + 1e-12) | (m.atom_loc > b - 1e-12))
    assert np.all(m.atom_mass > 0)
    if mu0 == 0.0 and lam < mu:
        assert m.atom_mass[0] == pytest.approx(1 - lam / mu, rel=1e-12)


def test_mm1_lu_rates_closed():
    for lam, mu in [(1, 2), (2, 1), (0.3, 1.7)]:
        lh, mh = mm1_lu_rates_closed(lam, mu, 0)
        assert lh == pytest.approx(lam + mu, rel=1e-14)
        for n in range(1, 15):
            lh, _ = mm1_lu_rates_closed(lam, mu, n)
            assert lh + mh == pytest.approx(lam + mu, rel=1e-13)
            _, mh = mm1_lu_rates_closed(lam, mu, n)
    with pytest.raises(DomainError):
        mm1_lu_rates_closed(1, 1, 2)


def _gamma_upper(n, x):
    return float(mpmath.gammainc(n, x))


def test_mm_inf_closed_rates():
    lh, _ = mm_inf_lu_rates_closed(1, 1, 0)
    assert lh == pytest.approx(2.0, rel=1e-14)
    lh, _ = mm_inf_lu_rates_closed(1, 1, 1)
    assert lh == pytest.approx(2.5, rel=1e-14)
    lh, _ = mm_inf_lu_rates_closed(1, 1, 0, "mu0hat_max")
    assert lh == pytest.approx((1 - 2 / math.e) / (1 - 1 / math.e), rel=1e-13)
    assert special.upper_inc_gamma(3, 1) == pytest.approx(5 / math.e, rel=1e-14)
    with pytest.raises(DomainError):
        mm_inf_lu_rates_closed(1, 1, 0, "bogus")
    for n in range(10):
        lh, mh = mm_inf_lu_rates_closed(1.5, 0.8, n)
        ref = 0.8 * _gamma_upper(n + 2, 1.5 / 0.8) / _gamma_upper(n + 1, 1.5 / 0.8)
        assert lh == pytest.approx(ref, rel=1e-12)
    assert mm_inf_lu_bound(1, 1) == pytest.approx(1 / (1 - 1 / math.e), rel=1e-14)


def test_linear_measure_examples():
    m = linear_measure(1, 2, 1)
    assert m.atom_loc[:4].tolist() == [0.0, 1.0, 2.0, 3.0]
    np.testing.assert_allclose(m.atom_mass[:6], 0.5 ** np.arange(1, 7), rtol=1e-13)
    m = linear_measure(2, 1, 1)
    assert m.atom_loc[:3].tolist() == [1.0, 2.0, 3.0]
    np.testing.assert_allclose(m.atom_mass[:6], 0.5 ** np.arange(1, 7), rtol=1e-13)
    m = linear_measure(1, 1, 2)
    assert m.total_mass() == pytest.approx(1.0, abs=1e-10)
    assert m.integrate(lambda x: np.stack([x]))[0] == pytest.approx(2.0, rel=1e-10)


def test_linear_lu_coeffs_examples():
    for beta in (0.5, 1.0, 3.0):
        for n in range(20):
            c = linear_lu_coeffs_closed(1.0, 1.0, beta, 0.0, n)
            assert c.s == pytest.approx(1 + n / beta, rel=1e-14)
            if n:
                assert c.r == pytest.approx(-n / beta, rel=1e-14)
            assert c.x == pytest.approx(beta, rel=1e-14)
    lam, beta = 1.3, 2.0
    lh, mh = lu.lu_factorize(linear(lam, lam, beta), lam * beta, 30).darboux_rates()
    n = np.arange(25)
    np.testing.assert_allclose(lh[:25], lam * (n + 1), rtol=1e-12)
    np.testing.assert_allclose(mh[1:25], lam * (n[1:] + beta), rtol=1e-12)
    g = lu.lu_factorize(linear(1, 2, 1), 0.0, 5)
    c = linear_lu_coeffs_closed(1, 2, 1, 0.0, 2)
    assert c.s == pytest.approx(g.s_tilde[2], rel=1e-13)
    assert c.x == pytest.approx(g.x_tilde[2], rel=1e-13)


def test_linear_lu_coeffs_all_regimes():
    for lam, mu, beta in [(1, 2, 1), (1, 2, 2.5), (3, 1, 0.7), (2, 1, 1.5), (1, 1, 0.4)]:
        p = linear(lam, mu, beta)
        b = lu.lu_admissible_upper_bound(p)
        for frac in (0.0, 0.4, 1.0):
            f = lu.lu_factorize_recursive(p, frac * b, 25)
            for n in range(20):
                c = linear_lu_coeffs_closed(lam, mu, beta, frac * b, n)
                assert c.s == pytest.approx(f.s_tilde[n], rel=1e-9), (lam, mu, beta, frac, n)
                assert c.x == pytest.approx(f.x_tilde[n], rel=1e-9)


def test_special_examples():
    assert special.gauss_2f1(1, 1, 2, 0.5) == pytest.approx(2 * math.log(2), rel=1e-14)
    assert linear_A_closed(2, 1, 1) == pytest.approx(math.log(2), rel=1e-13)
    assert series_A(linear(2, 1, 1)).value == pytest.approx(math.log(2), rel=1e-10)
    assert special.lower_inc_gamma(2, 1) == pytest.approx(1 - 2 / math.e, rel=1e-14)
    assert special.inc_beta(0.5, 1, 1) == pytest.approx(0.5, rel=1e-14)
    assert special.dilog(-1) == pytest.approx(-math.pi ** 2 / 12, rel=1e-14)


def test_linear_series_closed():
    for lam, mu, beta in [(2, 1, 1), (3, 1, 0.5), (5, 2, 2.2), (1, 1, 3)]:
        assert series_A(linear(lam, mu, beta)).value == pytest.approx(linear_A_closed(lam, mu, beta), rel=1e-9)
    for lam, mu, beta in [(1, 2, 1), (1, 3, 2.5)]:
        assert series_B(linear(lam, mu, beta)).value == pytest.approx(linear_B_closed(lam, mu, beta), rel=1e-9)


def test_linear_ul_case_report():
    r = linear_ul_case_report(1, 1, 3)
    assert r["x0_plus_mu0_tilde_max"] == pytest.approx(2.0, rel=1e-10)
    assert r["T"] == pytest.approx(2.0, rel=1e-8)
    assert r["mu0_tilde_max"] == pytest.approx(1.0, rel=1e-8)
    assert r["closed_form"]["T"] == 2.0 and r["closed_form"]["mu0_tilde_max"] == 1.0
    assert linear_ul_case_report(1, 1, 0.5)["case"] == "Blocked"
    assert linear_ul_case_report(1, 2, 1)["case"] == "Blocked"
    for lam, mu in [(2, 1), (3, 1), (5, 4)]:
        r = linear_ul_case_report(lam, mu, 1)
        assert r["mu0_tilde_max"] == pytest.approx(r["closed_form"]["mu0_tilde_max"], rel=1e-8)
        assert r["mu0_tilde_max"] == pytest.approx(linear_dilog_bound(lam, mu), rel=1e-8)
    with pytest.raises(DomainError):
        linear_dilog_bound(1, 2)


def test_dilog_bound_vs_mpmath():
    for lam, mu in [(2, 1), (3, 1)]:
        L = mpmath.log(1 - mpmath.mpf(mu) / lam)
        ref = 2 * (lam - mu) * L / (L ** 2 + 2 * mpmath.polylog(2, mpmath.mpf(mu) / (mu - lam)))
        assert linear_dilog_bound(lam, mu) == pytest.approx(float(ref), rel=1e-13)


def test_ul_admissible_agrees_with_report():
    r = linear_ul_case_report(1, 1, 3)
    rep = ul.ul_admissibility(linear(1, 1, 3), 1.0, 1.0)
    assert rep.admissible
    rep = ul.ul_admissibility(linear(1, 1, 3), 0.9, 1.1)
    assert not rep.admissible
    assert r["case"] == "TFinite"


def test_process_spec_loading(tmp_path):
    p = load_process_spec({"preset": "mm1", "params": {"lambda": 1, "mu": 2}})
    assert p.mu0 == 0.0
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"table": {"lambda": [1, 1, 1], "mu": [2, 2, 2], "mu0": 0.5}}))
    q = load_process_spec(path)
    assert q.mu0 == 0.5 and q.lam(np.arange(2)).tolist() == [1.0, 1.0]
    assert load_process_spec('{"preset": "linear", "params": {"lambda": 1, "mu": 1, "beta": 3}}').label \
        == "linear(1,1,3)"
    for bad in ({"preset": "nope"}, {"preset": "mm1", "params": {"lambda": 1}},
                {"preset": "mm_inf", "params": {"lambda": 1, "mu": 1, "x": 2}}, {}):
        with pytest.raises(DomainError):
            load_process_spec(bad)
    with pytest.raises(DomainError):
        make_preset("mm1", {"lambda": -1, "mu": 1})
    with pytest.raises(DomainError):
        mm_inf(0, 1)
    assert mm1(1, 2).label == "mm1(1,2,0)"
