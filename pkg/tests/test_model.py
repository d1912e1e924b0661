import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import ces_f_mp, ces_fprime_mp, ces_omega_mp, grid_max, omega_plain
from wariness import (DomainError, EconomyConfig, InvalidParameterError, Preferences,
                      ProductionSpec, Regime, SolverSettings, UnsupportedCaseError, regime_of,
                      regime_thresholds)

INF = math.inf


# -- production primitives ---------------------------------------------------------

def test_f_at_unit_capital_equals_productivity():
    assert ProductionSpec(3, 0.3, -3).f(1.0) == pytest.approx(3.0, rel=1e-15)


def test_f_zero_capital_limits():
    assert ProductionSpec(3.3, 0.3, -0.9).f(0.0) == 0.0
    assert ProductionSpec(3.3, 0.3, -0.9).f(1e-12) < 1e-9
    p = ProductionSpec(2, 0.5, 0.5)
    assert p.f(0.0) == pytest.approx(2 * 0.5 ** 2)


def test_f_matches_high_precision_value():
    # 50-digit reference
    assert ProductionSpec(3.6, 0.3, -0.6).f(2.26776) == pytest.approx(
        4.4250104479565496442760939070345319167991127252995, abs=1e-9)


@pytest.mark.parametrize("k", [0.01, 0.5, 1.0, 2.0, 37.0])
def test_f_prime_and_omega_match_mpmath(k):
    A, a, rho = 3.4, 0.4, -3.0
    p = ProductionSpec(A, a, rho)
    assert p.f_prime(k) == pytest.approx(float(ces_fprime_mp(A, a, rho, k)), rel=1e-12)
    assert p.omega(k) == pytest.approx(float(ces_omega_mp(A, a, rho, k)), rel=1e-12)


def test_f_prime_zero_capital_limit():
    p = ProductionSpec(3.3, 0.3, -0.9)
    assert p.limits().fp0 == pytest.approx(12.5744, abs=5e-4)
    assert p.f_prime(1e-10) == pytest.approx(p.limits().fp0, rel=1e-8)


def test_f_prime_regime_gap():
    p = ProductionSpec(3.4, 0.4, -3)
    prefs = Preferences(0.7, 0.255)
    r_low, _ = regime_thresholds(prefs)
    assert p.f_prime(1.17) == pytest.approx(0.895, abs=0.01)
    assert p.f_prime(1.17) - r_low == pytest.approx(-0.15, abs=0.01)


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_f_prime_agrees_with_central_difference(k):
    for p in (ProductionSpec(3, 0.3, -3), ProductionSpec(2, 0.5, 0.5, 0.9),
              ProductionSpec(3.6, 0.3, -0.6)):
        d = 1e-6 * k
        fd = (p.f(k + d) - p.f(k - d)) / (2 * d)
        assert abs(p.f_prime(k) - fd) < 1e-6 * abs(p.f_prime(k))


def test_f_prime_rejects_nonpositive_capital():
    with pytest.raises(DomainError):
        ProductionSpec(3, 0.3, -3).f_prime(0.0)
    with pytest.raises(DomainError):
        ProductionSpec(3, 0.3, -3).omega(-1.0)


def test_omega_values():
    assert ProductionSpec(3, 0.3, -3).omega(1.0) == pytest.approx(2.1, rel=1e-14)
    assert ProductionSpec(3.4, 0.4, -3).omega(1.5) == pytest.approx(3.1699047531182553, rel=1e-12)
    assert ProductionSpec(3.4, 0.4, -3).omega(1.5) == pytest.approx(3.170, abs=5e-4)


def test_omega_is_independent_of_linear_term():
    assert ProductionSpec(3, 0.3, -3, 0.0).omega(0.7) == ProductionSpec(3, 0.3, -3, 0.5).omega(0.7)


def test_h_values():
    assert ProductionSpec(3, 0.3, -3).h(1.6) == pytest.approx(1.9095958808328690, rel=1e-12)
    p = ProductionSpec(3.4, 0.4, -3)
    assert p.h(0.955) == pytest.approx(p.omega(1.5) / 1.32, abs=1e-3)
    assert ProductionSpec(3, 0.3, -3).h(1e-12) < 1e-10


def test_big_h_values():
    assert ProductionSpec(3.6, 0.3, -0.6).big_h(2.26776) == pytest.approx(1.1, abs=1e-4)
    # Stated steady state of the near-tangent economy; happens to lie within 1e-4 of n.
    assert ProductionSpec(2.973, 0.3, -0.6).big_h(1.06726) == pytest.approx(1.1, abs=1e-3)


def test_big_h_is_unimodal():
    p = ProductionSpec(3.6, 0.3, -0.6)
    k = np.geomspace(1e-6, 1e6, 10_000)
    dH = np.diff(p.big_h(k))
    assert np.count_nonzero(np.diff(np.sign(dH)) != 0) == 1
    assert p.big_h(1e-10) < 1e-3 and p.big_h(1e10) < 1e-3


def test_cap_w_maximum_matches_closed_form_and_grid():
    p = ProductionSpec(3, 0.3, -3)
    x0, mw = p.x0_and_max_w()
    xg, wg = grid_max(lambda x: omega_plain(3, 0.3, -3, x) / x, 1e-3, 1e3)
    assert x0 == pytest.approx(1.0874, abs=5e-4)
    assert mw == pytest.approx(2.1175, abs=5e-4)
    assert p.cap_w(x0) == pytest.approx(mw, rel=1e-9)
    assert mw == pytest.approx(wg, rel=1e-6)
    assert x0 == pytest.approx(xg, rel=1e-3)
    assert p.cap_w(x0 * 1.001) < mw and p.cap_w(x0 / 1.001) < mw


def test_closed_form_hand_case():
    x0, mw = ProductionSpec(1, 0.5, -1).x0_and_max_w()
    assert x0 == pytest.approx(1.0, rel=1e-14)
    assert mw == pytest.approx(0.5, rel=1e-14)


def test_max_w_scales_with_productivity():
    x0, mw = ProductionSpec(3, 0.3, -3).x0_and_max_w()
    x0b, mwb = ProductionSpec(6, 0.3, -3).x0_and_max_w()
    assert x0b == pytest.approx(x0, rel=1e-14) and mwb == pytest.approx(2 * mw, rel=1e-14)


def test_cap_w_decreasing_for_positive_rho():
    p = ProductionSpec(2, 0.5, 0.5)
    assert p.cap_w(0.1) > p.cap_w(1) > p.cap_w(10)
    with pytest.raises(UnsupportedCaseError):
        p.x0_and_max_w()


def test_limits():
    lim = ProductionSpec(3.3, 0.3, -0.9).limits()
    assert lim.fp0 == pytest.approx(12.5744, abs=5e-4) and lim.fp_inf == 0
    lim = ProductionSpec(2, 0.5, 0.5).limits()
    assert lim.fp0 == INF and lim.fp_inf == pytest.approx(0.5, rel=1e-14)
    base, shifted = ProductionSpec(3.3, 0.3, -0.9).limits(), ProductionSpec(3.3, 0.3, -0.9, 0.9).limits()
    assert shifted.fp0 == pytest.approx(base.fp0 + 0.9) and shifted.fp_inf == pytest.approx(0.9)


def test_elasticity():
    assert ProductionSpec(1, 0.5, -3).elasticity == pytest.approx(0.25)


@pytest.mark.parametrize("kw", [dict(A=0), dict(a=1.0), dict(a=0), dict(rho=0), dict(rho=1),
                                dict(B=-0.1), dict(A=float("nan")), dict(rho=float("inf"))])
def test_production_rejects_bad_parameters(kw):
    base = dict(A=1.0, a=0.5, rho=-1.0, B=0.0)
    with pytest.raises(InvalidParameterError):
        ProductionSpec(**{**base, **kw})


# -- properties --------------------------------------------------------------------

@pytest.mark.parametrize("p,lo,hi", [(ProductionSpec(3, 0.3, -3), 1e-2, 1e2),
                                     (ProductionSpec(2, 0.5, 0.5), 1e-6, 1e6),
                                     (ProductionSpec(1, 0.4, -10), 0.2, 5.0)])
def test_concavity_on_grid(p, lo, hi):
    # Strictness is only resolvable in double precision where f' is not saturated.
    wide = np.geomspace(1e-10, 1e10, 1000)
    assert np.all(np.diff(p.f_prime(wide)) <= 3e-14 * p.f_prime(wide)[1:])
    k = np.geomspace(lo, hi, 1000)
    fp = p.f_prime(k)
    assert np.all(np.diff(fp) < 0)
    assert np.all(fp > 0)
    fpp = np.diff(fp) / np.diff(k)
    assert np.all(fpp < 0)
    assert np.all(p.f_second(k) < 0)


def test_omega_monotone_and_zero_limits():
    for p, lo, hi in ((ProductionSpec(3, 0.3, -3), 1e-6, 1e2), (ProductionSpec(2, 0.5, 0.5), 1e-6, 1e6)):
        assert np.all(np.diff(p.omega(np.geomspace(lo, hi, 1000))) > 0)
        assert np.all(np.diff(p.omega(np.geomspace(1e-10, 1e10, 1000))) >= 0)
    assert ProductionSpec(3, 0.3, -3).omega(1e-12) < 1e-30
    assert ProductionSpec(3, 0.3, -3).omega_limits()[0] == 0.0
    p = ProductionSpec(2, 0.5, 0.5)
    assert p.omega(1e-12) == pytest.approx(p.omega_limits()[0], rel=1e-5)


def test_extreme_substitution_stays_finite():
    p = ProductionSpec(2.0, 0.4, -10.0)
    lim = p.limits()
    for k in (1e-10, 1e10):
        vals = [p.f(k), p.f_prime(k), p.omega(k), p.cap_w(k), p.big_h(k)]
        assert all(np.isfinite(v) for v in vals)
    assert p.f(1e-10) < 1e-9
    assert p.f_prime(1e-10) == pytest.approx(lim.fp0, rel=1e-8)
    assert p.f(1e10) == pytest.approx(lim.f_inf, rel=1e-8)
    assert p.omega(1e10) == pytest.approx(p.omega_limits()[1], rel=1e-8)


@settings(max_examples=100, deadline=None)
@given(A=st.floats(0.5, 10), a=st.floats(0.05, 0.95), rho=st.floats(-5, -0.05))
def test_closed_form_max_w_vs_grid(A, a, rho):
    p = ProductionSpec(A, a, rho)
    x0, mw = p.x0_and_max_w()
    # A grid centred on the candidate spanning many decades, then local refinement.
    k = np.geomspace(x0 * 1e-4, x0 * 1e4, 100_001)
    w = omega_plain(A, a, rho, k) / k
    i = int(np.argmax(w))
    kk = np.linspace(k[max(i - 1, 0)], k[min(i + 1, k.size - 1)], 2001)
    assert mw == pytest.approx(np.max(omega_plain(A, a, rho, kk) / kk), rel=1e-6)


# -- preferences ---------------------------------------------------------------------

def test_regime_thresholds():
    lo, hi = regime_thresholds(Preferences(0.7, 0.255))
    assert lo == pytest.approx(1.0471, abs=1e-4) and hi == pytest.approx(1.7929, abs=1e-4)
    assert regime_thresholds(Preferences(0.7, 0.0)) == (pytest.approx(1 / 0.7), pytest.approx(1 / 0.7))
    assert regime_thresholds(Preferences(0.7, INF)) == (0.0, INF)


def test_regime_of():
    prefs = Preferences(0.7, 0.255)
    assert regime_of(prefs, 0.8953) is Regime.LOW_RETURN
    assert regime_of(prefs, 1.889) is Regime.HIGH_RETURN
    lo, hi = regime_thresholds(prefs)
    assert regime_of(prefs, lo) is Regime.EQUAL_CONSUMPTION
    assert regime_of(prefs, hi) is Regime.EQUAL_CONSUMPTION


def test_infinite_wariness_is_explicit():
    p = Preferences(0.7, INF)
    assert p.infinite_wariness and p.beta1 == INF and p.beta2 == 0.0 and p.lambda_ == 1.0
    assert Preferences.from_lambda(0.7, 1.0) == p
    assert Preferences.from_lambda(0.7, 0.5).gamma == pytest.approx(1.0)


@settings(max_examples=200, deadline=None)
@given(beta=st.floats(0.01, 5), gamma=st.floats(0, 50))
def test_beta_identity(beta, gamma):
    p = Preferences(beta, gamma)
    assert p.beta2 <= p.beta <= p.beta1
    assert p.beta1 * p.beta2 == pytest.approx(beta * (beta + gamma) / (1 + gamma), rel=1e-12)
    lo, hi = regime_thresholds(p)
    assert lo <= hi
    if gamma == 0:
        assert p.beta1 == p.beta == p.beta2


def test_thresholds_spread_with_wariness():
    lo, hi = regime_thresholds(Preferences(0.7, 1e8))
    assert lo < 1e-7 and hi > 1e7


@pytest.mark.parametrize("beta,gamma", [(0, 0), (-1, 0), (0.7, -0.1), (0.7, float("nan")),
                                        (float("inf"), 0)])
def test_preferences_reject_bad_values(beta, gamma):
    with pytest.raises(InvalidParameterError):
        Preferences(beta, gamma)


def test_economy_and_solver_validation():
    with pytest.raises(InvalidParameterError):
        EconomyConfig(0.0, Preferences(0.7), ProductionSpec(1, 0.5, -1))
    with pytest.raises(InvalidParameterError):
        SolverSettings(grid_points=32)
    with pytest.raises(InvalidParameterError):
        SolverSettings(k_min=1.0, k_max=0.5)
    with pytest.raises(InvalidParameterError):
        SolverSettings(tol_root=0.0)


def test_with_param_round_trip():
    e = EconomyConfig(1.1, Preferences(0.7, 0.2), ProductionSpec(3, 0.3, -3))
    for name, v in [("A", 2.0), ("a", 0.4), ("rho", -1.0), ("B", 0.1), ("n", 1.2),
                    ("beta", 0.6), ("gamma", 0.5)]:
        assert e.with_param(name, v).get_param(name) == v
    with pytest.raises(InvalidParameterError):
        e.with_param("zeta", 1.0)
