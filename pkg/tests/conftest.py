"""Shared fixtures for the kirkspread test suite."""

from __future__ import annotations

import pytest

from kirkspread.analytic import BASE_MARKET, BASE_MATURITY, BASE_STRIKE, Contract, MarketInputs
from kirkspread.mc import McConfig


@pytest.fixture
def base_market() -> MarketInputs:
    """S1 = S2 = 100, sigma 0.3 / 0.2, rho 0.9, r = 0."""
    return BASE_MARKET


@pytest.fixture
def base_contract() -> Contract:
    return Contract(strike=BASE_STRIKE, maturity=BASE_MATURITY)


@pytest.fixture
def small_mc() -> McConfig:
    """A cheap but multi-batch budget."""
    return McConfig(n_pairs=10_000, seed=7, batch_size=1_000)


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption(
        "--update-golden",
        action="store_true",
        default=False,
        help="rewrite the golden reproduce CSVs under tests/data/ from the current build",
    )


@pytest.fixture
def update_golden(request: pytest.FixtureRequest) -> bool:
    return bool(request.config.getoption("--update-golden"))
