"""
Monte Carlo benchmark for two-asset spread calls.

Both assets follow geometric Brownian motion under the risk-neutral measure;
only terminal values matter, so one correlated normal pair per trial suffices.

Reproducibility model
---------------------
Work is cut into batches of ``McConfig.batch_size`` pairs.  Batch ``b`` of
slot ``s`` draws from a Philox stream keyed by ``(seed, (s << 32) | b)``, so a
batch's variates depend only on its key, never on which worker ran it or when.
Per-batch statistics (count, sum, sum of squared deviations) are merged by a
pairwise tree whose shape depends only on the batch count, so results are
bit-identical for any number of workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special, stats

from kirkspread.analytic import Contract, MarketInputs
from kirkspread.errors import DomainError

logger = logging.getLogger(__name__)

STREAM_BITS = 32
_MAX_STREAM_PART = 1 << STREAM_BITS
_UNIT_53 = 2.0 ** -53

DEFAULT_BATCH_SIZE = 1 << 16


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class McConfig:
    """Trial budget and reproducibility settings.

    With ``antithetic`` each of the ``n_pairs`` slots evaluates a draw and its
    negation; without it the slot evaluates two independent draws.  Either way
    the payoff budget is ``2 * n_pairs``.
    """

    n_pairs: int
    seed: int = 0
    antithetic: bool = True
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self) -> None:
        for name in ("n_pairs", "seed", "batch_size"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise DomainError(f"{name} must be an integer, got {value!r}")
        if self.n_pairs < 1:
            raise DomainError(f"n_pairs must be >= 1, got {self.n_pairs!r}")
        if self.batch_size < 1:
            raise DomainError(f"batch_size must be >= 1, got {self.batch_size!r}")
        if not 0 <= self.seed < (1 << 64):
            raise DomainError(f"seed must fit in 64 unsigned bits, got {self.seed!r}")
        if self.n_batches > _MAX_STREAM_PART:
            raise DomainError(
                f"n_pairs / batch_size gives {self.n_batches} batches; at most {_MAX_STREAM_PART} allowed"
            )

    @property
    def n_batches(self) -> int:
        return -(-self.n_pairs // self.batch_size)

    @property
    def payoff_evaluations(self) -> int:
        return 2 * self.n_pairs

    def batch_length(self, batch: int) -> int:
        """Pairs in *batch*; only the last batch may be short."""
        return min(self.batch_size, self.n_pairs - batch * self.batch_size)


@dataclass(frozen=True)
class NormalDraws:
    """Two independent vectors of standard normal variates."""

    w: np.ndarray
    z: np.ndarray

    def __post_init__(self) -> None:
        if self.w.shape != self.z.shape or self.w.ndim != 1:
            raise DomainError(f"w and z must be equal-length vectors, got {self.w.shape} and {self.z.shape}")

    def __len__(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True)
class PriceEstimate:
    """Discounted MC mean, its standard error and the number of averaged values."""

    mean: float
    std_error: float
    n_effective: int


# ---------------------------------------------------------------------------
# Draws
# ---------------------------------------------------------------------------
def stream_index(slot: int, batch: int) -> int:
    """Pack a (slot, batch) pair into the 64-bit stream index."""
    if not 0 <= slot < _MAX_STREAM_PART:
        raise DomainError(f"slot must lie in [0, 2**{STREAM_BITS}), got {slot!r}")
    if not 0 <= batch < _MAX_STREAM_PART:
        raise DomainError(f"batch must lie in [0, 2**{STREAM_BITS}), got {batch!r}")
    return (slot << STREAM_BITS) | batch


def draw_normals(config: McConfig, stream_index: int, size: int | None = None) -> NormalDraws:
    """Return *size* (default ``batch_size``) normal pairs of one stream.

    The Philox key is (seed, stream_index); raw 64-bit outputs keep their top
    53 bits, are mapped to the open interval (0, 1) and pushed through the
    normal quantile.  The draw at counter position i is a pure function of
    (seed, stream_index, i).
    """
    if size is None:
        size = config.batch_size
    if size < 1:
        raise DomainError(f"size must be >= 1, got {size!r}")
    if not 0 <= stream_index < (1 << 64):
        raise DomainError(f"stream_index must fit in 64 unsigned bits, got {stream_index!r}")

    key = np.array([config.seed, stream_index], dtype=np.uint64)
    raw = np.random.Philox(key=key).random_raw(2 * size)
    uniforms = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _UNIT_53
    normals = special.ndtri(uniforms)
    return NormalDraws(w=normals[:size], z=normals[size:])


# ---------------------------------------------------------------------------
# Path pieces
# ---------------------------------------------------------------------------
def correlate(w, z, rho: float):
    """B = rho * w + sqrt(1 - rho^2) * z, standard normal with corr(w, B) = rho."""
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [-1, 1], got {rho!r}")
    return rho * w + math.sqrt(1.0 - rho * rho) * z


def terminal_value(spot, sigma: float, r: float, maturity: float, shock):
    """spot * exp((r - sigma^2 / 2) T + sigma sqrt(T) shock)."""
    value = spot * np.exp((r - 0.5 * sigma * sigma) * maturity + sigma * math.sqrt(maturity) * shock)
    if np.ndim(value) == 0:
        return float(value)
    return value


def spread_payoff(s1, s2, strike):
    """max(S1 - S2 - K, 0)."""
    value = np.maximum(np.subtract(s1, s2) - strike, 0.0)
    if np.ndim(value) == 0:
        return float(value)
    return value


def _spreads(market: MarketInputs, maturity: float, w: np.ndarray, z: np.ndarray) -> np.ndarray:
    b = correlate(w, z, market.rho)
    s1 = terminal_value(market.s1_0, market.sigma1, market.r, maturity, w)
    s2 = terminal_value(market.s2_0, market.sigma2, market.r, maturity, b)
    return s1 - s2


def _strike_payoffs(spreads: np.ndarray, strikes: np.ndarray) -> np.ndarray:
    # Rows are strikes, columns are trials.
    return np.maximum(spreads[np.newaxis, :] - strikes[:, np.newaxis], 0.0)


# ---------------------------------------------------------------------------
# Deterministic reduction
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class _BatchStats:
    count: int
    total: np.ndarray  # per strike
    m2: np.ndarray     # per strike, sum of squared deviations from the batch mean


def _batch_stats(values: np.ndarray) -> _BatchStats:
    count = values.shape[1]
    total = np.sum(values, axis=1)
    centred = values - (total / count)[:, np.newaxis]
    return _BatchStats(count=count, total=total, m2=np.sum(centred * centred, axis=1))


def _merge(a: _BatchStats, b: _BatchStats) -> _BatchStats:
    count = a.count + b.count
    delta = b.total / b.count - a.total / a.count
    m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / count)
    return _BatchStats(count=count, total=a.total + b.total, m2=m2)


def _tree_reduce(level: list[_BatchStats]) -> _BatchStats:
    """Pairwise merge in index order; the tree depends only on len(level)."""
    while len(level) > 1:
        merged = [_merge(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            merged.append(level[-1])
        level = merged
    return level[0]


def _run_batches(fn: Callable[[int], _BatchStats], n_batches: int, workers: int) -> list[_BatchStats]:
    if workers <= 1 or n_batches == 1:
        return [fn(b) for b in range(n_batches)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order, independent of completion order.
        return list(pool.map(fn, range(n_batches)))


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------
def mc_price_strikes(
    market: MarketInputs,
    strikes: Sequence[float],
    maturity: float,
    config: McConfig,
    *,
    slot: int = 0,
    workers: int = 1,
) -> list[PriceEstimate]:
    """Estimate every strike in *strikes* from one shared set of draws.

    Each pair value is the discounted average of the payoff on a draw and on
    its negation (antithetic), or one discounted payoff per independent draw
    (plain).  Because all strikes see the same draws, the estimated mean is
    non-increasing in the strike, exactly.
    """
    if len(strikes) == 0:
        raise DomainError("strikes must not be empty")
    for k in strikes:
        Contract(strike=k, maturity=maturity)
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers!r}")
    stream_index(slot, 0)

    strike_arr = np.asarray(strikes, dtype=np.float64)
    discount = math.exp(-market.r * maturity)

    def run_batch(batch: int) -> _BatchStats:
        m = config.batch_length(batch)
        idx = stream_index(slot, batch)
        if config.antithetic:
            draws = draw_normals(config, idx, m)
            up = _strike_payoffs(_spreads(market, maturity, draws.w, draws.z), strike_arr)
            down = _strike_payoffs(_spreads(market, maturity, -draws.w, -draws.z), strike_arr)
            values = discount * (0.5 * (up + down))
        else:
            draws = draw_normals(config, idx, 2 * m)
            values = discount * _strike_payoffs(_spreads(market, maturity, draws.w, draws.z), strike_arr)
        return _batch_stats(values)

    logger.debug(
        "mc: %d pairs in %d batches, slot %d, %s, %d worker(s)",
        config.n_pairs, config.n_batches, slot,
        "antithetic" if config.antithetic else "plain", workers,
    )
    total = _tree_reduce(_run_batches(run_batch, config.n_batches, workers))

    n = total.count
    means = total.total / n
    if n > 1:
        std_errors = np.sqrt(np.maximum(total.m2, 0.0) / (n - 1)) / math.sqrt(n)
    else:
        std_errors = np.zeros_like(means)
    return [
        PriceEstimate(mean=float(mu), std_error=float(se), n_effective=n)
        for mu, se in zip(means, std_errors)
    ]


def mc_price(
    market: MarketInputs,
    contract: Contract,
    config: McConfig,
    *,
    slot: int = 0,
    workers: int = 1,
) -> PriceEstimate:
    """Monte Carlo price of one spread call; see :func:`mc_price_strikes`."""
    (estimate,) = mc_price_strikes(
        market, [contract.strike], contract.maturity, config, slot=slot, workers=workers
    )
    return estimate


def normal_interval(mean: float, std_error: float, level: float = 0.95) -> tuple[float, float]:
    """mean +/- z_level * std_error, z_level the two-sided standard normal quantile."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    z = float(stats.norm.ppf(0.5 + 0.5 * level))
    half = z * std_error
    return mean - half, mean + half


def confidence_interval(estimate: PriceEstimate, level: float = 0.95) -> tuple[float, float]:
    """Two-sided normal confidence interval of an MC estimate."""
    return normal_interval(estimate.mean, estimate.std_error, level)
