"""
Strike x correlation x maturity sweeps.

Every (rho, T) pair is a *slice*.  A slice simulates once and evaluates all
strikes on the same draws, so error-vs-K curves carry no strike-to-strike MC
noise.  Slice ``s`` (row-major, T outer, rho inner) draws from RNG slot ``s``;
with ``reuse_draws`` off each cell gets its own slot, its flat cell index.
A cell's content therefore depends on its coordinates only, never on the
order in which slices are evaluated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from kirkspread.analytic import (
    BASE_MARKET,
    Contract,
    MarketInputs,
    kirk_price,
    modified_kirk_price,
)
from kirkspread.errors import DomainError
from kirkspread.mc import McConfig, PriceEstimate, mc_price, mc_price_strikes

logger = logging.getLogger(__name__)

DEFAULT_STRIKES: tuple[float, ...] = tuple(float(k) for k in range(21))
DEFAULT_RHOS: tuple[float, ...] = (0.80, 0.85, 0.90, 0.95, 0.999)
DEFAULT_MATURITIES: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5)
DEFAULT_SEED = 20170501
DEFAULT_PAIRS = 1_000_000
FULL_PAIRS = 5_000_000

FLAG_KIRK_UNDEFINED = "kirk_undefined"
FLAG_MODIFIED_UNDEFINED = "modified_kirk_undefined"
FLAG_BENCHMARK_ZERO = "benchmark_zero"

# Published base-case values (S1 = S2 = 100, sigma 0.3 / 0.2, r = 0, T = 0.5),
# keyed by (K, rho).
REFERENCE_MATURITY = 0.5
PUBLISHED_INTERVALS: dict[tuple[float, float], tuple[float, float]] = {
    (5.0, 0.9): (2.357551, 2.363762),
    (5.0, 0.999): (1.273913, 1.278092),
    (10.0, 0.9): (1.26478, 1.269644),
    (10.0, 0.999): (0.5398617, 0.5427516),
}
PUBLISHED_KIRK: dict[tuple[float, float], float] = {
    (5.0, 0.9): 2.3647228,
    (5.0, 0.999): 1.2862590,
    (10.0, 0.9): 1.2745318,
    (10.0, 0.999): 0.5615868,
}
PUBLISHED_MODIFIED_KIRK: dict[tuple[float, float], float] = {
    (5.0, 0.9): 2.3626873,
    (5.0, 0.999): 1.27686463,
    (10.0, 0.9): 1.2681347,
    (10.0, 0.999): 0.54140923,
}


def _strictly_increasing(name: str, values: Sequence[float]) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if not out:
        raise DomainError(f"{name} must not be empty")
    for prev, cur in zip(out, out[1:]):
        if not cur > prev:
            raise DomainError(f"{name} must be strictly increasing, got {prev!r} before {cur!r}")
    return out


@dataclass(frozen=True)
class GridSpec:
    """What to sweep and how to simulate it.

    ``base_market`` supplies spots, vols and rate; its ``rho`` is replaced by
    each entry of ``rhos``.
    """

    strikes: tuple[float, ...] = DEFAULT_STRIKES
    rhos: tuple[float, ...] = DEFAULT_RHOS
    maturities: tuple[float, ...] = DEFAULT_MATURITIES
    base_market: MarketInputs = BASE_MARKET
    mc: McConfig = field(default_factory=lambda: McConfig(n_pairs=DEFAULT_PAIRS, seed=DEFAULT_SEED))
    reuse_draws: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "strikes", _strictly_increasing("strikes", self.strikes))
        object.__setattr__(self, "rhos", _strictly_increasing("rhos", self.rhos))
        object.__setattr__(self, "maturities", _strictly_increasing("maturities", self.maturities))
        for k in self.strikes:
            Contract(strike=k, maturity=1.0)
        for t in self.maturities:
            Contract(strike=0.0, maturity=t)
        for rho in self.rhos:
            replace(self.base_market, rho=rho)

    @property
    def n_slices(self) -> int:
        return len(self.maturities) * len(self.rhos)

    @property
    def n_cells(self) -> int:
        return self.n_slices * len(self.strikes)


@dataclass(frozen=True)
class GridCell:
    """One (K, rho, T) point: benchmark, both approximations and their % errors.

    Undefined quantities are None and named in ``flags``.
    """

    strike: float
    rho: float
    maturity: float
    mc_mean: float
    mc_std_error: float
    kirk: float | None
    modified_kirk: float | None
    err_kirk_pct: float | None
    err_modified_pct: float | None
    flags: tuple[str, ...] = ()


def error_pct(approx: float, benchmark: float) -> float:
    """Signed percentage error of *approx* against *benchmark*; > 0 means overpricing."""
    if not math.isfinite(benchmark) or benchmark <= 0.0:
        raise DomainError(f"benchmark must be > 0 for a percentage error, got {benchmark!r}")
    return (approx * 100.0) / benchmark - 100.0


def _make_cell(market: MarketInputs, contract: Contract, estimate: PriceEstimate) -> GridCell:
    flags: list[str] = []
    try:
        kirk: float | None = kirk_price(market, contract)
    except DomainError as exc:
        logger.debug("K=%g rho=%g T=%g: kirk undefined: %s", contract.strike, market.rho, contract.maturity, exc)
        kirk = None
        flags.append(FLAG_KIRK_UNDEFINED)
    try:
        modified: float | None = modified_kirk_price(market, contract)
    except DomainError as exc:
        logger.debug("K=%g rho=%g T=%g: modified kirk undefined: %s", contract.strike, market.rho, contract.maturity, exc)
        modified = None
        flags.append(FLAG_MODIFIED_UNDEFINED)

    err_kirk = err_modified = None
    if estimate.mean > 0.0:
        if kirk is not None:
            err_kirk = error_pct(kirk, estimate.mean)
        if modified is not None:
            err_modified = error_pct(modified, estimate.mean)
    else:
        flags.append(FLAG_BENCHMARK_ZERO)

    return GridCell(
        strike=contract.strike,
        rho=market.rho,
        maturity=contract.maturity,
        mc_mean=estimate.mean,
        mc_std_error=estimate.std_error,
        kirk=kirk,
        modified_kirk=modified,
        err_kirk_pct=err_kirk,
        err_modified_pct=err_modified,
        flags=tuple(flags),
    )


def run_slice(spec: GridSpec, maturity_index: int, rho_index: int, *, workers: int = 1) -> list[GridCell]:
    """Evaluate every strike of one (rho, T) slice."""
    maturity = spec.maturities[maturity_index]
    rho = spec.rhos[rho_index]
    market = replace(spec.base_market, rho=rho)
    slice_index = maturity_index * len(spec.rhos) + rho_index

    if spec.reuse_draws:
        estimates = mc_price_strikes(market, spec.strikes, maturity, spec.mc, slot=slice_index, workers=workers)
    else:
        base = slice_index * len(spec.strikes)
        estimates = [
            mc_price(market, Contract(strike=k, maturity=maturity), spec.mc, slot=base + i, workers=workers)
            for i, k in enumerate(spec.strikes)
        ]

    cells = [
        _make_cell(market, Contract(strike=k, maturity=maturity), est)
        for k, est in zip(spec.strikes, estimates)
    ]
    flagged = sum(1 for c in cells if c.flags)
    logger.info(
        "slice %d/%d  rho=%g  T=%g  %d strikes%s",
        slice_index + 1, spec.n_slices, rho, maturity, len(cells),
        f"  ({flagged} flagged)" if flagged else "",
    )
    return cells


def run_grid(spec: GridSpec, *, workers: int = 1) -> list[GridCell]:
    """All cells of *spec* in row-major order: T outer, rho middle, K inner.

    Domain failures of single cells are recorded as flags; the sweep never aborts.
    """
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers!r}")
    cells: list[GridCell] = []
    for t_index in range(len(spec.maturities)):
        for r_index in range(len(spec.rhos)):
            cells.extend(run_slice(spec, t_index, r_index, workers=workers))
    return cells


# ---------------------------------------------------------------------------
# Lookups and reference comparison
# ---------------------------------------------------------------------------
def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


def select_slice(cells: Iterable[GridCell], rho: float, maturity: float) -> list[GridCell]:
    """Cells of the (rho, T) slice in strike order; DomainError if there are none."""
    found = [c for c in cells if _same(c.rho, rho) and _same(c.maturity, maturity)]
    if not found:
        raise DomainError(f"no grid slice at rho={rho!r}, T={maturity!r}")
    return sorted(found, key=lambda c: c.strike)


def find_cell(cells: Iterable[GridCell], strike: float, rho: float, maturity: float) -> GridCell:
    for cell in cells:
        if _same(cell.strike, strike) and _same(cell.rho, rho) and _same(cell.maturity, maturity):
            return cell
    raise DomainError(f"no grid cell at K={strike!r}, rho={rho!r}, T={maturity!r}")


@dataclass(frozen=True)
class ReferenceRow:
    """One published base-case entry next to its regenerated counterpart."""

    strike: float
    rho: float
    published_interval: tuple[float, float]
    mc_mean: float
    mc_std_error: float
    published_kirk: float
    kirk: float | None
    published_modified_kirk: float
    modified_kirk: float | None

    @property
    def inside_interval(self) -> bool:
        lo, hi = self.published_interval
        return lo <= self.mc_mean <= hi


def reference_comparison(cells: Sequence[GridCell]) -> list[ReferenceRow]:
    """Pair each published (K, rho) entry at T = 0.5 with the regenerated cell."""
    rows = []
    for (strike, rho), interval in PUBLISHED_INTERVALS.items():
        cell = find_cell(cells, strike, rho, REFERENCE_MATURITY)
        rows.append(
            ReferenceRow(
                strike=strike,
                rho=rho,
                published_interval=interval,
                mc_mean=cell.mc_mean,
                mc_std_error=cell.mc_std_error,
                published_kirk=PUBLISHED_KIRK[(strike, rho)],
                kirk=cell.kirk,
                published_modified_kirk=PUBLISHED_MODIFIED_KIRK[(strike, rho)],
                modified_kirk=cell.modified_kirk,
            )
        )
    return rows
