"""Closed-form pricers: published values, reduction identities, domain errors."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from kirkspread.analytic import (
    BASE_MARKET,
    Contract,
    MarketInputs,
    analytic_terms,
    kirk_price,
    kirk_radicand,
    kirk_vol,
    margrabe_price,
    margrabe_vol,
    modified_kirk_price,
    modified_kirk_vol,
    price,
    std_normal_cdf,
)
from kirkspread.errors import DomainError
from kirkspread.grid import DEFAULT_RHOS, DEFAULT_STRIKES, PUBLISHED_KIRK, PUBLISHED_MODIFIED_KIRK

# (K, rho, expected) at S1 = S2 = 100, sigma 0.3 / 0.2, r = 0, T = 0.5.
KIRK_CASES = [(k, rho, v) for (k, rho), v in PUBLISHED_KIRK.items()]
MODIFIED_CASES = [(k, rho, v) for (k, rho), v in PUBLISHED_MODIFIED_KIRK.items()]


def _random_markets(n: int, seed: int) -> list[MarketInputs]:
    rng = np.random.default_rng(seed)
    return [
        MarketInputs(
            s1_0=float(rng.uniform(10.0, 200.0)),
            s2_0=float(rng.uniform(10.0, 200.0)),
            sigma1=float(rng.uniform(0.01, 0.8)),
            sigma2=float(rng.uniform(0.01, 0.8)),
            rho=float(rng.uniform(-1.0, 1.0)),
            r=float(rng.uniform(-0.02, 0.1)),
        )
        for _ in range(n)
    ]


# ---------------------------------------------------------------------------
# Normal CDF
# ---------------------------------------------------------------------------
def test_cdf_known_points():
    assert std_normal_cdf(0.0) == 0.5
    assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)
    assert std_normal_cdf(-1.959964) == pytest.approx(0.025, abs=1e-6)


def test_cdf_matches_erfc_on_dense_grid():
    xs = np.linspace(-8.0, 8.0, 10_000)
    expected = np.array([0.5 * math.erfc(-x / math.sqrt(2.0)) for x in xs])
    np.testing.assert_allclose(std_normal_cdf(xs), expected, rtol=0.0, atol=1e-12)


def test_cdf_symmetric_and_monotone():
    xs = np.linspace(-10.0, 10.0, 2_001)
    p = std_normal_cdf(xs)
    np.testing.assert_allclose(p + std_normal_cdf(-xs), 1.0, rtol=0.0, atol=1e-14)
    assert np.all(np.diff(p) >= 0.0)
    assert np.all((p >= 0.0) & (p <= 1.0))


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_cdf_rejects_non_finite(bad):
    with pytest.raises(DomainError):
        std_normal_cdf(bad)


# ---------------------------------------------------------------------------
# Volatilities
# ---------------------------------------------------------------------------
def test_radicand_is_sum_of_squares():
    rng = np.random.default_rng(11)
    for _ in range(200):
        s1, s2 = rng.uniform(0.0, 1.0, size=2)
        rho = rng.uniform(-1.0, 1.0)
        u = rng.uniform(0.0, 1.0)
        expected = (s1 - rho * s2 * u) ** 2 + (1.0 - rho * rho) * (s2 * u) ** 2
        assert kirk_radicand(s1, s2, rho, u) == pytest.approx(expected, abs=1e-14)
        assert kirk_radicand(s1, s2, rho, u) >= -1e-15


def test_kirk_vol_high_correlation():
    market = replace(BASE_MARKET, rho=0.999)
    u = 100.0 / 105.0
    expected = math.sqrt(0.09 - 2 * 0.999 * 0.06 * u + 0.04 * u * u)
    a = kirk_vol(market, Contract(strike=5.0, maturity=0.5))
    assert a == pytest.approx(expected, abs=1e-12)
    assert a == pytest.approx(0.110044, abs=1e-5)


def test_kirk_vol_at_zero_strike_is_margrabe_vol(base_market):
    assert kirk_vol(base_market, Contract(strike=0.0, maturity=0.5)) == margrabe_vol(base_market)


def test_modified_vol_corrects_downward_below_the_money():
    market = replace(BASE_MARKET, rho=0.999)
    contract = Contract(strike=5.0, maturity=0.5)
    a = kirk_vol(market, contract)
    u = 100.0 / 105.0
    correction = (
        0.5 * (0.2 * u - 0.999 * 0.3) ** 2 / a**3
        * 0.04 * (500.0 / 11025.0) * (math.log(100.0) - math.log(105.0))
    )
    i_hat = modified_kirk_vol(market, contract)
    assert i_hat == pytest.approx(a + correction, abs=1e-12)
    assert i_hat < a
    assert i_hat == pytest.approx(0.109648, abs=1e-5)


def test_modified_vol_is_kirk_vol_at_the_money():
    market = MarketInputs(s1_0=105.0, s2_0=100.0, sigma1=0.3, sigma2=0.2, rho=0.9)
    contract = Contract(strike=5.0, maturity=0.5)
    assert modified_kirk_vol(market, contract) == kirk_vol(market, contract)


def test_modified_vol_degenerate_kirk_vol():
    market = MarketInputs(s1_0=110.0, s2_0=100.0, sigma1=0.0, sigma2=0.0, rho=0.5)
    with pytest.raises(DomainError, match="degenerate Kirk volatility"):
        modified_kirk_vol(market, Contract(strike=5.0, maturity=0.5))


def test_modified_vol_collapse():
    market = MarketInputs(s1_0=1.0, s2_0=100.0, sigma1=0.3, sigma2=1.0, rho=0.999)
    with pytest.raises(DomainError, match="collapsed"):
        modified_kirk_vol(market, Contract(strike=100.0, maturity=0.5))


# ---------------------------------------------------------------------------
# Prices
# ---------------------------------------------------------------------------
@pytest.mark.parametrize("strike,rho,expected", KIRK_CASES)
def test_kirk_published_values(strike, rho, expected):
    market = replace(BASE_MARKET, rho=rho)
    got = kirk_price(market, Contract(strike=strike, maturity=0.5))
    np.testing.assert_allclose(got, expected, rtol=0.0, atol=1e-6)


@pytest.mark.parametrize("strike,rho,expected", MODIFIED_CASES)
def test_modified_kirk_published_values(strike, rho, expected):
    market = replace(BASE_MARKET, rho=rho)
    got = modified_kirk_price(market, Contract(strike=strike, maturity=0.5))
    np.testing.assert_allclose(got, expected, rtol=0.0, atol=1e-6)


def test_margrabe_high_correlation():
    market = replace(BASE_MARKET, rho=0.999)
    value = margrabe_price(market, 0.5)
    assert value == pytest.approx(2.837, abs=1e-3)
    assert value == kirk_price(market, Contract(strike=0.0, maturity=0.5))


@pytest.mark.parametrize("market", _random_markets(100, seed=2017))
def test_zero_strike_reductions_are_exact(market):
    contract = Contract(strike=0.0, maturity=0.75)
    m = margrabe_price(market, 0.75)
    assert kirk_price(market, contract) == m
    assert modified_kirk_price(market, contract) == m


@pytest.mark.parametrize("market", _random_markets(30, seed=31))
def test_at_the_money_modified_equals_kirk(market):
    strike = 7.5
    atm = replace(market, s1_0=market.s2_0 + strike)
    contract = Contract(strike=strike, maturity=0.4)
    assert modified_kirk_price(atm, contract) == kirk_price(atm, contract)


@pytest.mark.parametrize("rho", DEFAULT_RHOS)
def test_prices_bounded_and_decreasing_in_strike(rho):
    market = replace(BASE_MARKET, rho=rho)
    for pricer in (kirk_price, modified_kirk_price):
        values = [pricer(market, Contract(strike=k, maturity=0.5)) for k in DEFAULT_STRIKES]
        assert all(0.0 <= v <= market.s1_0 for v in values)
        assert all(b <= a for a, b in zip(values, values[1:]))


def test_zero_volatility_is_intrinsic():
    market = MarketInputs(s1_0=110.0, s2_0=100.0, sigma1=0.0, sigma2=0.0, rho=0.3)
    assert kirk_price(market, Contract(strike=5.0, maturity=1.0)) == 5.0
    assert kirk_price(market, Contract(strike=15.0, maturity=1.0)) == 0.0


def test_positive_rate_discounts():
    market = replace(BASE_MARKET, r=0.05)
    contract = Contract(strike=5.0, maturity=0.5)
    assert kirk_price(market, contract) == pytest.approx(
        math.exp(-0.025) * kirk_price(BASE_MARKET, contract), rel=1e-12
    )


def test_price_dispatch(base_market, base_contract):
    assert price("kirk", base_market, base_contract) == kirk_price(base_market, base_contract)
    assert price("modified-kirk", base_market, base_contract) == modified_kirk_price(base_market, base_contract)
    assert price("margrabe", base_market, Contract(0.0, 0.5)) == margrabe_price(base_market, 0.5)
    with pytest.raises(DomainError, match="zero strike"):
        price("margrabe", base_market, base_contract)
    with pytest.raises(DomainError, match="unknown method"):
        price("bachelier", base_market, base_contract)


# ---------------------------------------------------------------------------
# Terms and inputs
# ---------------------------------------------------------------------------
def test_analytic_terms_consistent(base_market, base_contract):
    terms = analytic_terms(base_market, base_contract, "modified-kirk")
    assert terms.a_t == kirk_vol(base_market, base_contract)
    assert terms.i_hat == modified_kirk_vol(base_market, base_contract)
    assert terms.vol == terms.i_hat
    assert terms.s_ratio == pytest.approx(100.0 / 105.0, rel=1e-15)
    assert terms.x_star == pytest.approx(math.log(105.0), rel=1e-15)
    assert terms.d2 == pytest.approx(terms.d1 - terms.vol * math.sqrt(0.5), abs=1e-15)


def test_analytic_terms_marks_undefined_correction():
    market = MarketInputs(s1_0=1.0, s2_0=100.0, sigma1=0.3, sigma2=1.0, rho=0.999)
    contract = Contract(strike=100.0, maturity=0.5)
    assert analytic_terms(market, contract, "kirk").i_hat is None
    with pytest.raises(DomainError):
        analytic_terms(market, contract, "modified-kirk")


@pytest.mark.parametrize(
    "field,value",
    [("s1_0", 0.0), ("s2_0", -1.0), ("sigma1", -0.1), ("sigma2", math.nan), ("rho", 1.5), ("r", math.inf)],
)
def test_market_inputs_rejected(field, value):
    with pytest.raises(DomainError, match=field):
        replace(BASE_MARKET, **{field: value})


@pytest.mark.parametrize("strike,maturity", [(-1.0, 0.5), (5.0, 0.0), (5.0, -0.5), (math.nan, 0.5)])
def test_contract_rejected(strike, maturity):
    with pytest.raises(DomainError):
        Contract(strike=strike, maturity=maturity)


def test_domain_error_is_value_error():
    with pytest.raises(ValueError):
        Contract(strike=-1.0, maturity=0.5)
