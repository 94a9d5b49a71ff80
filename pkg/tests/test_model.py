import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import PUB_BETA, PUB_MU, PUB_RHO, PUB_VAR, PUB_XI, PUB_ZETA
from ccapm import model
from ccapm.errors import DomainError, NoFiniteEquilibrium
from ccapm.model import EconomySummary, GrowthMoments, Preferences, SufficiencyFactors

mpmath.mp.dps = 40


def test_crra_examples():
    assert model.crra_utility(1.0, 2.0) == (-1.0, 1.0)
    assert model.crra_utility(2.0, 2.0) == (-0.5, 0.25)
    u, mu = model.crra_utility(math.e, 1.0)
    assert u == pytest.approx(1.0, abs=1e-15)
    assert mu == pytest.approx(1 / math.e, rel=1e-15)


@pytest.mark.parametrize("c", [0.0, -1.0])
def test_crra_rejects_nonpositive(c):
    with pytest.raises(DomainError, match="zero consumption"):
        model.crra_utility(c, 2.0)


@given(st.floats(1e-3, 1e3), st.floats(0, 10))
def test_crra_marginal_positive(c, rho):
    assert model.crra_utility(c, rho)[1] > 0


def test_lognormal_power_mean_examples():
    assert model.lognormal_power_mean(PUB_MU, PUB_VAR, 1) == pytest.approx(1.018, abs=1e-6)
    assert model.lognormal_power_mean(0.3, 0.2, 0) == 1.0
    oracle = float(mpmath.exp(mpmath.mpf(-PUB_RHO) * PUB_MU
                              + mpmath.mpf(PUB_RHO) ** 2 * PUB_VAR / 2))
    got = model.lognormal_power_mean(PUB_MU, PUB_VAR, -PUB_RHO)
    assert got == pytest.approx(oracle, abs=1e-15)
    assert got == pytest.approx(0.983022, abs=1e-6)
    with pytest.raises(DomainError):
        model.lognormal_power_mean(0.0, -1e-9, 1)


@settings(max_examples=300)
@given(st.floats(-0.1, 0.1), st.floats(0, 0.01))
def test_lognormal_round_trip(mu, var):
    m1 = model.lognormal_power_mean(mu, var, 1)
    m2 = model.lognormal_power_mean(mu, var, 2)
    assert abs(m1 - math.exp(mu + var / 2)) <= 1e-12
    assert abs((m2 - m1 ** 2) - m1 ** 2 * math.expm1(var)) <= 1e-12


def _mp_price_dividend(beta, zeta, rho, mu, var):
    k = mpmath.mpf(beta) * zeta * mpmath.exp((1 - mpmath.mpf(rho)) * mu
                                             + (1 - mpmath.mpf(rho)) ** 2 * mpmath.mpf(var) / 2)
    return k / (1 - k)


def test_price_dividend_ratio_examples(rounded_moments):
    m0 = GrowthMoments.equilibrium(0.0, 0.0)
    assert model.price_dividend_ratio(Preferences(0.5, 1.0), 1.0, m0) == 1.0
    v = model.price_dividend_ratio(Preferences(PUB_BETA, PUB_RHO), PUB_ZETA, rounded_moments)
    oracle = float(_mp_price_dividend(PUB_BETA, PUB_ZETA, PUB_RHO, PUB_MU, PUB_VAR))
    assert v == pytest.approx(oracle, rel=1e-12)
    assert v == pytest.approx(19.65, abs=0.01)
    with pytest.raises(NoFiniteEquilibrium) as exc:
        model.price_dividend_ratio(Preferences(1.0, 0.0), 1.1, m0)
    assert exc.value.k == pytest.approx(1.1)


def test_expected_equity_return(rounded_moments):
    re = model.expected_equity_return(Preferences(PUB_BETA, PUB_RHO), PUB_ZETA, rounded_moments)
    assert re == pytest.approx(1.0698, abs=1e-4)
    v = model.price_dividend_ratio(Preferences(PUB_BETA, PUB_RHO), PUB_ZETA, rounded_moments)
    assert re == pytest.approx((v + 1) / v * rounded_moments.mean_growth, rel=1e-13)
    # beta = zeta = 1, rho = 0 needs k = E(x) < 1 to have an equilibrium at all
    shrinking = GrowthMoments.equilibrium(-0.03, 0.002)
    assert model.expected_equity_return(Preferences(1.0, 0.0), 1.0, shrinking) == 1.0
    with pytest.raises(NoFiniteEquilibrium):
        model.expected_equity_return(Preferences(1.0, 0.0), 1.0, rounded_moments)


def test_joint_equity_return_matches_equilibrium(rounded_moments):
    prefs = Preferences(PUB_BETA, 2.5)
    a = model.expected_equity_return(prefs, 0.97, rounded_moments)
    b = model.expected_equity_return_joint(prefs, 0.97, rounded_moments)
    assert a == pytest.approx(b, rel=1e-14)


def test_joint_equity_return_general_moments():
    m = GrowthMoments(0.018, 0.0013, 0.02, 0.012, 0.002)
    prefs = Preferences(0.99, 2.0)
    rho = mpmath.mpf(2)
    ez = mpmath.exp(mpmath.mpf(0.02) + mpmath.mpf(0.012) / 2)
    ezm = mpmath.exp(mpmath.mpf(0.02) - rho * 0.018
                     + (mpmath.mpf(0.012) + rho ** 2 * 0.0013 - 2 * rho * 0.002) / 2)
    oracle = float(ez / (mpmath.mpf(0.99) * 0.95 * ezm))
    assert model.expected_equity_return_joint(prefs, 0.95, m) == pytest.approx(oracle, rel=1e-14)


def test_risk_free_rate(rounded_moments):
    rf = model.risk_free_rate(Preferences(PUB_BETA, PUB_RHO), PUB_XI, rounded_moments)
    assert rf == pytest.approx(1.008, abs=1e-4)
    assert model.risk_free_rate(Preferences(1.0, 0.0), 1.0, rounded_moments) == 1.0
    direct = math.exp(-(-2 * PUB_MU + 0.5 * 4 * PUB_VAR)) / 0.99
    assert model.risk_free_rate(Preferences(0.99, 2.0), 1.0, rounded_moments) == pytest.approx(
        direct, rel=1e-15)


def test_log_equity_premium(rounded_moments):
    lep = model.log_equity_premium(PUB_ZETA, PUB_XI, PUB_RHO, PUB_VAR)
    assert lep == pytest.approx(0.059504, abs=1e-5)
    assert model.log_equity_premium(0.9, 0.9, 0.0, PUB_VAR) == 0.0
    prefs = Preferences(PUB_BETA, PUB_RHO)
    re = model.expected_equity_return(prefs, PUB_ZETA, rounded_moments)
    rf = model.risk_free_rate(prefs, PUB_XI, rounded_moments)
    assert abs(lep - (math.log(re) - math.log(rf))) <= 1e-10


@given(st.floats(-0.05, 0.05), st.floats(0, 0.01), st.floats(0, 6),
       st.floats(0.7, 1.0), st.floats(0.7, 1.2), st.floats(0.7, 1.2))
def test_premium_consistency(mu, var, rho, beta, zeta, xi):
    m = GrowthMoments.equilibrium(mu, var)
    prefs = Preferences(beta, rho)
    try:
        re = model.expected_equity_return(prefs, zeta, m)
    except NoFiniteEquilibrium:
        return
    rf = model.risk_free_rate(prefs, xi, m)
    assert abs(model.log_equity_premium(zeta, xi, rho, var) - (math.log(re) - math.log(rf))) <= 1e-12


@given(st.floats(-0.1, 0.1), st.floats(0, 0.01), st.floats(0, 10))
def test_equity_condition_algebra(mu, var, rho):
    lhs = math.log(model.lognormal_power_mean(mu, var, 1)) - (1 - rho) * mu - 0.5 * (1 - rho) ** 2 * var
    rhs = rho * mu - 0.5 * rho ** 2 * var + rho * var
    assert abs(lhs - rhs) <= 1e-14


def test_baseline_nesting(rounded_moments):
    # standard lognormal CCAPM forms, written out independently
    m = rounded_moments
    for beta, rho in [(0.99, 2.0), (0.96, 0.5), (0.99, 1.033526), (0.9, 6.0)]:
        prefs = Preferences(beta, rho)
        ln_re = -math.log(beta) + rho * m.mu_x - 0.5 * rho ** 2 * m.var_x + rho * m.cov_xz
        ln_rf = -math.log(beta) + rho * m.mu_x - 0.5 * rho ** 2 * m.var_x
        re_14 = math.exp(m.mu_x + m.var_x / 2) / (
            beta * math.exp((1 - rho) * m.mu_x + 0.5 * (1 - rho) ** 2 * m.var_x))
        re = model.expected_equity_return(prefs, 1.0, m)
        assert abs(re - re_14) <= 1e-15
        assert abs(re - math.exp(ln_re)) <= 1e-15
        assert abs(model.risk_free_rate(prefs, 1.0, m) - math.exp(ln_rf)) <= 1e-15
        assert abs(model.log_equity_premium(1.0, 1.0, rho, m.var_x) - rho * m.var_x) <= 1e-15


def test_monotone_in_factors(rounded_moments):
    prefs = Preferences(0.99, 2.0)
    grid = np.linspace(0.8, 1.0, 41)
    re = [model.expected_equity_return(prefs, z, rounded_moments) for z in grid]
    rf = [model.risk_free_rate(prefs, x, rounded_moments) for x in np.linspace(0.8, 1.3, 41)]
    assert np.all(np.diff(re) < 0)
    assert np.all(np.diff(rf) < 0)


def test_type_invariants():
    with pytest.raises(DomainError):
        Preferences(0.0, 1.0)
    with pytest.raises(DomainError):
        Preferences(0.99, -0.1)
    with pytest.raises(DomainError):
        SufficiencyFactors(0.0, 1.0)
    with pytest.raises(DomainError):
        GrowthMoments(0.0, 0.01, 0.0, 0.01, 0.02)
    with pytest.raises(DomainError):
        EconomySummary(1.07, 1.01, 1.02, 0.03, 0.07)
    m = GrowthMoments(0.01, 0.001)
    assert (m.mu_z, m.var_z, m.cov_xz) == (0.01, 0.001, 0.001)
    assert m.is_equilibrium


def test_table1_premium_consistent():
    assert abs(model.TABLE1.mean_premium
               - (model.TABLE1.mean_equity_return - model.TABLE1.risk_free_rate)) <= 1e-12


def test_price_bundle(rounded_moments):
    out = model.price(Preferences(PUB_BETA, PUB_RHO),
                      SufficiencyFactors(PUB_ZETA, PUB_XI), rounded_moments)
    assert list(out) == ["price_dividend_ratio", "expected_equity_return", "risk_free_rate",
                         "equity_premium", "log_equity_premium"]
    assert out["equity_premium"] == pytest.approx(0.0618, abs=2e-4)


def test_tiny_variance_accepted():
    m = GrowthMoments.equilibrium(0.0, 1.6e-190)
    assert m.cov_xz == m.var_x
