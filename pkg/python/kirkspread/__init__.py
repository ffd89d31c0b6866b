"""
kirkspread — spread option pricing with Kirk-type approximations.

Closed-form pricers (Margrabe, Kirk, modified Kirk with a skew-corrected
volatility), a reproducible antithetic Monte Carlo benchmark, and the sweeps
and result files that compare the two.

Quick start::

    from kirkspread import BASE_MARKET, Contract, kirk_price, modified_kirk_price
    c = Contract(strike=5.0, maturity=0.5)
    kirk_price(BASE_MARKET, c)            # 2.3647228...
    modified_kirk_price(BASE_MARKET, c)   # 2.3626873...
"""

from __future__ import annotations

from importlib import metadata

try:
    __version__ = metadata.version("kirkspread")
except metadata.PackageNotFoundError:
    # Running from a source checkout without an install.
    __version__ = "0.1.0a0"

from kirkspread.analytic import (
    BASE_MARKET,
    BASE_MATURITY,
    BASE_STRIKE,
    AnalyticTerms,
    Contract,
    MarketInputs,
    analytic_terms,
    kirk_price,
    kirk_vol,
    margrabe_price,
    modified_kirk_price,
    modified_kirk_vol,
    std_normal_cdf,
)
from kirkspread.errors import ConfigError, DomainError, KirkSpreadError, SinkError, UsageError
from kirkspread.grid import GridCell, GridSpec, error_pct, run_grid
from kirkspread.mc import (
    McConfig,
    NormalDraws,
    PriceEstimate,
    confidence_interval,
    correlate,
    draw_normals,
    mc_price,
    mc_price_strikes,
    spread_payoff,
    terminal_value,
)

__all__ = [
    "AnalyticTerms",
    "BASE_MARKET",
    "BASE_MATURITY",
    "BASE_STRIKE",
    "ConfigError",
    "Contract",
    "DomainError",
    "GridCell",
    "GridSpec",
    "KirkSpreadError",
    "MarketInputs",
    "McConfig",
    "NormalDraws",
    "PriceEstimate",
    "SinkError",
    "UsageError",
    "__version__",
    "analytic_terms",
    "confidence_interval",
    "correlate",
    "draw_normals",
    "error_pct",
    "kirk_price",
    "kirk_vol",
    "margrabe_price",
    "mc_price",
    "mc_price_strikes",
    "modified_kirk_price",
    "modified_kirk_vol",
    "run_grid",
    "spread_payoff",
    "std_normal_cdf",
    "terminal_value",
]
