"""
Closed-form spread option pricers.

Three approximations share one discounted Black shell

    e^{-rT} * (S1 * N(d1) - X * N(d2)),
    d1 = (ln(S1 / X) + vol^2 T / 2) / (vol sqrt(T)),   d2 = d1 - vol sqrt(T)

and differ only in the effective strike X and the volatility fed into it:

    margrabe        X = S2        vol = sqrt(s1^2 - 2 rho s1 s2 + s2^2)
    kirk            X = S2 + K    vol = a_t (the same form, with s2 scaled by S2/(S2+K))
    modified-kirk   X = S2 + K    vol = I_t (a_t plus a log-moneyness skew correction)

Because the three go through the same arithmetic, the K = 0 reductions
(modified-kirk == kirk == margrabe) hold bit-for-bit, not just to rounding.

All functions are pure; they are safe to call from any thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import special

from kirkspread.errors import DomainError

Method = Literal["margrabe", "kirk", "modified-kirk"]
METHODS: tuple[str, ...] = ("margrabe", "kirk", "modified-kirk")


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------
def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class MarketInputs:
    """Two-asset market state at valuation."""

    s1_0: float
    s2_0: float
    sigma1: float
    sigma2: float
    rho: float
    r: float = 0.0

    def __post_init__(self) -> None:
        for name in ("s1_0", "s2_0", "sigma1", "sigma2", "rho", "r"):
            _require_finite(name, getattr(self, name))
        if self.s1_0 <= 0.0:
            raise DomainError(f"s1_0 must be > 0, got {self.s1_0!r}")
        if self.s2_0 <= 0.0:
            raise DomainError(f"s2_0 must be > 0, got {self.s2_0!r}")
        if self.sigma1 < 0.0:
            raise DomainError(f"sigma1 must be >= 0, got {self.sigma1!r}")
        if self.sigma2 < 0.0:
            raise DomainError(f"sigma2 must be >= 0, got {self.sigma2!r}")
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho!r}")


@dataclass(frozen=True)
class Contract:
    """Strike and maturity of one spread call, payoff max(S1 - S2 - K, 0) at T."""

    strike: float
    maturity: float

    def __post_init__(self) -> None:
        _require_finite("strike", self.strike)
        _require_finite("maturity", self.maturity)
        if self.strike < 0.0:
            raise DomainError(f"strike must be >= 0, got {self.strike!r}")
        if self.maturity <= 0.0:
            raise DomainError(f"maturity must be > 0, got {self.maturity!r}")


# Base case of the published experiments: spots 100/100, vols 0.3/0.2, r = 0.
BASE_MARKET = MarketInputs(s1_0=100.0, s2_0=100.0, sigma1=0.3, sigma2=0.2, rho=0.9, r=0.0)
BASE_STRIKE = 5.0
BASE_MATURITY = 0.5


@dataclass(frozen=True)
class AnalyticTerms:
    """Every intermediate quantity of the closed-form pricers for one method.

    ``i_hat`` is None where the skew correction is undefined (degenerate a_t
    with K > 0, or a collapsed corrected volatility).  ``vol`` is the volatility
    the chosen method feeds into the Black shell; ``d2 == d1 - vol * sqrt(T)``.
    """

    method: str
    a_t: float
    i_hat: float | None
    sigma_margrabe: float
    s_ratio: float
    x_t: float
    x_star: float
    vol: float
    d1: float
    d2: float


# ---------------------------------------------------------------------------
# Standard normal CDF
# ---------------------------------------------------------------------------
def std_normal_cdf(x):
    """Standard normal CDF.

    Accepts a scalar or an array; non-finite input raises DomainError.
    Uses the Cephes ``ndtr`` (erf/erfc rational approximations), accurate to
    well under 1e-12 absolute on [-8, 8].
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"std_normal_cdf needs finite input, got {x!r}")
    p = np.clip(special.ndtr(arr), 0.0, 1.0)
    if p.ndim == 0:
        return float(p)
    return p


# ---------------------------------------------------------------------------
# Volatilities
# ---------------------------------------------------------------------------
def kirk_radicand(sigma1: float, sigma2: float, rho: float, u: float) -> float:
    """sigma1^2 - 2 rho sigma1 sigma2 u + sigma2^2 u^2.

    Equals (sigma1 - rho sigma2 u)^2 + (1 - rho^2) sigma2^2 u^2, hence >= 0 for
    rho in [-1, 1] up to rounding.
    """
    return sigma1 * sigma1 - 2.0 * rho * sigma1 * sigma2 * u + sigma2 * sigma2 * u * u


def _effective_vol(sigma1: float, sigma2: float, rho: float, u: float) -> float:
    return math.sqrt(max(kirk_radicand(sigma1, sigma2, rho, u), 0.0))


def _strike_weight(market: MarketInputs, contract: Contract) -> float:
    # u = S2 / (S2 + K); exactly 1.0 at K = 0.
    return market.s2_0 / (market.s2_0 + contract.strike)


def margrabe_vol(market: MarketInputs) -> float:
    """Volatility of the ratio S1/S2: sqrt(s1^2 - 2 rho s1 s2 + s2^2)."""
    return _effective_vol(market.sigma1, market.sigma2, market.rho, 1.0)


def kirk_vol(market: MarketInputs, contract: Contract) -> float:
    """Kirk effective volatility a_t, with u = S2 / (S2 + K) in both terms."""
    u = _strike_weight(market, contract)
    return _effective_vol(market.sigma1, market.sigma2, market.rho, u)


def modified_kirk_vol(market: MarketInputs, contract: Contract) -> float:
    """Skew-corrected implied volatility I_t.

    I_t = a + 1/2 (sigma2 u - rho sigma1)^2 a^-3 sigma2^2 (S2 K / (S2 + K)^2) (X_t - x*)

    with X_t = ln S1 and x* = ln(S2 + K).  The correction vanishes, and a is
    returned as-is, when K = 0 or X_t = x*.

    Raises
    ------
    DomainError
        a = 0 with a non-vanishing correction ("degenerate Kirk volatility"),
        or a corrected volatility <= 0 ("skew correction collapsed volatility").
    """
    a = kirk_vol(market, contract)
    s2, strike = market.s2_0, contract.strike
    x_t = math.log(market.s1_0)
    x_star = math.log(s2 + strike)
    if strike == 0.0 or x_t == x_star:
        return a
    if a == 0.0:
        raise DomainError(
            "degenerate Kirk volatility: a_t = 0 makes the skew correction singular "
            f"(sigma1={market.sigma1!r}, sigma2={market.sigma2!r}, rho={market.rho!r}, K={strike!r})"
        )

    u = _strike_weight(market, contract)
    skew = market.sigma2 * u - market.rho * market.sigma1
    moneyness_weight = s2 * strike / ((s2 + strike) ** 2)
    correction = (
        0.5 * skew * skew / (a ** 3)
        * market.sigma2 * market.sigma2
        * moneyness_weight
        * (x_t - x_star)
    )
    i_hat = a + correction
    if not i_hat > 0.0:
        raise DomainError(
            f"skew correction collapsed volatility: a_t={a!r}, corrected={i_hat!r}"
        )
    return i_hat


# ---------------------------------------------------------------------------
# Black shell and pricers
# ---------------------------------------------------------------------------
def _d_terms(spot: float, effective_strike: float, vol: float, maturity: float) -> tuple[float, float]:
    sd = vol * math.sqrt(maturity)
    log_ratio = math.log(spot / effective_strike)
    if sd == 0.0:
        d = math.inf if log_ratio > 0.0 else -math.inf
        return d, d
    d1 = (log_ratio + 0.5 * vol * vol * maturity) / sd
    return d1, d1 - sd


def _black_shell(spot: float, effective_strike: float, vol: float, maturity: float, r: float) -> float:
    discount = math.exp(-r * maturity)
    if vol * math.sqrt(maturity) == 0.0:
        return discount * max(spot - effective_strike, 0.0)
    d1, d2 = _d_terms(spot, effective_strike, vol, maturity)
    price = discount * (spot * special.ndtr(d1) - effective_strike * special.ndtr(d2))
    # Rounding can leave a few ulps outside [0, S1] deep out of / in the money.
    return min(max(float(price), 0.0), spot)


def margrabe_price(market: MarketInputs, maturity: float) -> float:
    """Exchange option max(S1 - S2, 0), valued through the shared Black shell."""
    _require_finite("maturity", maturity)
    if maturity <= 0.0:
        raise DomainError(f"maturity must be > 0, got {maturity!r}")
    vol = margrabe_vol(market)
    return _black_shell(market.s1_0, market.s2_0, vol, maturity, market.r)


def kirk_price(market: MarketInputs, contract: Contract) -> float:
    """Kirk's approximation: Black shell on S1 vs S2 + K with vol a_t."""
    vol = kirk_vol(market, contract)
    return _black_shell(
        market.s1_0, market.s2_0 + contract.strike, vol, contract.maturity, market.r
    )


def modified_kirk_price(market: MarketInputs, contract: Contract) -> float:
    """Kirk's shell with the skew-corrected volatility I_t.

    Propagates the DomainError of :func:`modified_kirk_vol`.
    """
    vol = modified_kirk_vol(market, contract)
    return _black_shell(
        market.s1_0, market.s2_0 + contract.strike, vol, contract.maturity, market.r
    )


def price(method: Method, market: MarketInputs, contract: Contract) -> float:
    """Dispatch on the method name; margrabe requires a zero strike."""
    if method == "margrabe":
        if contract.strike != 0.0:
            raise DomainError(f"margrabe prices a zero strike only, got K={contract.strike!r}")
        return margrabe_price(market, contract.maturity)
    if method == "kirk":
        return kirk_price(market, contract)
    if method == "modified-kirk":
        return modified_kirk_price(market, contract)
    raise DomainError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")


def analytic_terms(market: MarketInputs, contract: Contract, method: Method = "kirk") -> AnalyticTerms:
    """Collect the intermediate symbols of *method* for inspection."""
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    if method == "margrabe" and contract.strike != 0.0:
        raise DomainError(f"margrabe prices a zero strike only, got K={contract.strike!r}")

    a_t = kirk_vol(market, contract)
    sigma_m = margrabe_vol(market)
    try:
        i_hat: float | None = modified_kirk_vol(market, contract)
    except DomainError:
        i_hat = None

    effective_strike = market.s2_0 + contract.strike
    if method == "margrabe":
        vol = sigma_m
    elif method == "kirk":
        vol = a_t
    else:
        # Raises with the reason when the correction is undefined.
        vol = modified_kirk_vol(market, contract)
    d1, d2 = _d_terms(market.s1_0, effective_strike, vol, contract.maturity)
    return AnalyticTerms(
        method=method,
        a_t=a_t,
        i_hat=i_hat,
        sigma_margrabe=sigma_m,
        s_ratio=market.s1_0 / effective_strike,
        x_t=math.log(market.s1_0),
        x_star=math.log(effective_strike),
        vol=vol,
        d1=d1,
        d2=d2,
    )
