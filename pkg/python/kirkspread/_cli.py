"""
Console-script entry point for kirkspread.

    kirkspread price      closed-form quote (margrabe, kirk, modified-kirk)
    kirkspread mc         Monte Carlo estimate with a confidence interval
    kirkspread grid       K x rho x T sweep from flags or a config file
    kirkspread reproduce  published default sweep plus the reference tables

Market flags default to the published base case (spots 100/100, vols
0.3/0.2, rho 0.9, r 0, T 0.5, K 5).

Exit codes:
    0    success
    2    usage error (bad flag, malformed number, violated constraint, bad config)
    3    domain error while computing
    4    I/O error
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Callable, Iterator, Sequence, TextIO

from kirkspread import __version__
from kirkspread._log import configure_logging
from kirkspread.analytic import (
    BASE_MARKET,
    BASE_MATURITY,
    BASE_STRIKE,
    METHODS,
    Contract,
    MarketInputs,
    analytic_terms,
    price,
)
from kirkspread.errors import (
    EXIT_DOMAIN,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    ConfigError,
    DomainError,
    UsageError,
)
from kirkspread.grid import (
    DEFAULT_SEED,
    FULL_PAIRS,
    DEFAULT_PAIRS,
    GridCell,
    GridSpec,
    reference_comparison,
    run_grid,
)
from kirkspread.io import load_grid_config, parse_int, write_figure_set, write_grid_config, write_grid_csv
from kirkspread.mc import DEFAULT_BATCH_SIZE, McConfig, confidence_interval, mc_price

logger = logging.getLogger("kirkspread.cli")

PROG = "kirkspread"
DEFAULT_MC_PAIRS = 100_000
DEFAULT_LEVEL = 0.95


# ---------------------------------------------------------------------------
# Flag types: each names its constraint so argparse reports
# "argument --flag: must be ..., got ..."
# ---------------------------------------------------------------------------
def _real(constraint: str, ok: Callable[[float], bool]) -> Callable[[str], float]:
    def parse(text: str) -> float:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"malformed number {text!r}") from None
        if not math.isfinite(value) or not ok(value):
            raise argparse.ArgumentTypeError(f"must be {constraint}, got {text}")
        return value

    return parse


def _integer(constraint: str, ok: Callable[[int], bool]) -> Callable[[str], int]:
    def parse(text: str) -> int:
        try:
            value = parse_int(text)
        except (ValueError, OverflowError):
            raise argparse.ArgumentTypeError(f"malformed integer {text!r}") from None
        if not ok(value):
            raise argparse.ArgumentTypeError(f"must be {constraint}, got {text}")
        return value

    return parse


def _real_list(constraint: str, ok: Callable[[float], bool]) -> Callable[[str], tuple[float, ...]]:
    item = _real(constraint, ok)

    def parse(text: str) -> tuple[float, ...]:
        values = tuple(item(t.strip()) for t in text.split(","))
        for prev, cur in zip(values, values[1:]):
            if not cur > prev:
                raise argparse.ArgumentTypeError(f"must be strictly increasing, got {text}")
        return values

    return parse


_positive = _real("> 0", lambda v: v > 0.0)
_non_negative = _real(">= 0", lambda v: v >= 0.0)
_any_real = _real("finite", lambda v: True)
_correlation = _real("in [-1, 1]", lambda v: -1.0 <= v <= 1.0)
_open_unit = _real("in (0, 1)", lambda v: 0.0 < v < 1.0)
_count = _integer(">= 1", lambda v: v >= 1)
_seed = _integer("in [0, 2**64)", lambda v: 0 <= v < (1 << 64))


# ---------------------------------------------------------------------------
# Argument groups
# ---------------------------------------------------------------------------
def _add_verbosity_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="More log output on stderr (repeatable)")
    parser.add_argument("-q", "--quiet", action="count", default=0,
                        help="Only warnings and errors on stderr")


def _add_market_args(parser: argparse.ArgumentParser, *, with_rho: bool = True) -> None:
    group = parser.add_argument_group("market")
    group.add_argument("--s1", type=_positive, default=None, help="spot of asset 1 (default 100)")
    group.add_argument("--s2", type=_positive, default=None, help="spot of asset 2 (default 100)")
    group.add_argument("--sigma1", type=_non_negative, default=None, help="volatility of asset 1 (default 0.3)")
    group.add_argument("--sigma2", type=_non_negative, default=None, help="volatility of asset 2 (default 0.2)")
    if with_rho:
        group.add_argument("--rho", type=_correlation, default=None, help="correlation (default 0.9)")
    group.add_argument("--r", type=_any_real, default=None, help="risk-free rate (default 0)")


def _add_contract_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("contract")
    group.add_argument("--strike", type=_non_negative, default=None,
                       help=f"spread strike K (default {BASE_STRIKE:g})")
    group.add_argument("--maturity", type=_positive, default=None,
                       help=f"years to expiry T (default {BASE_MATURITY:g})")


def _add_mc_args(parser: argparse.ArgumentParser, *, pairs_default: int | None) -> None:
    group = parser.add_argument_group("monte carlo")
    group.add_argument("--pairs", type=_count, default=pairs_default,
                       help="antithetic pairs M; the payoff budget is 2M")
    group.add_argument("--seed", type=_seed, default=None, help=f"RNG seed (default {DEFAULT_SEED})")
    group.add_argument("--batch-size", type=_count, default=None,
                       help=f"pairs per work unit (default {DEFAULT_BATCH_SIZE})")
    group.add_argument("--workers", type=_count, default=1,
                       help="worker threads; results do not depend on this")
    group.add_argument("--level", type=_open_unit, default=DEFAULT_LEVEL,
                       help="confidence level of reported intervals (default 0.95)")


def _add_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, default=None, help="CSV destination (default stdout)")
    parser.add_argument("--figures", type=Path, default=None, metavar="DIR",
                        help="also write per-slice figure data and per-maturity surfaces to DIR")


def _pick(value, default):
    return default if value is None else value


def _market_from_args(args: argparse.Namespace, base: MarketInputs = BASE_MARKET) -> MarketInputs:
    return MarketInputs(
        s1_0=_pick(args.s1, base.s1_0),
        s2_0=_pick(args.s2, base.s2_0),
        sigma1=_pick(args.sigma1, base.sigma1),
        sigma2=_pick(args.sigma2, base.sigma2),
        rho=_pick(getattr(args, "rho", None), base.rho),
        r=_pick(args.r, base.r),
    )


def _mc_from_args(args: argparse.Namespace, base: McConfig) -> McConfig:
    return McConfig(
        n_pairs=_pick(args.pairs, base.n_pairs),
        seed=_pick(args.seed, base.seed),
        antithetic=base.antithetic and not getattr(args, "plain", False),
        batch_size=_pick(args.batch_size, base.batch_size),
    )


@contextmanager
def _open_sink(path: Path | None) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    with path.open("w", encoding="utf-8", newline="") as fh:
        yield fh


def _fmt(value: float | None) -> str:
    return "undefined" if value is None else f"{value:.9g}"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------
def cmd_price(args: argparse.Namespace) -> int:
    if args.method == "margrabe" and args.strike is not None:
        raise UsageError("--strike: margrabe prices max(S1 - S2, 0) and takes no strike")
    market = _market_from_args(args)
    strike = 0.0 if args.method == "margrabe" else _pick(args.strike, BASE_STRIKE)
    contract = Contract(strike=strike, maturity=_pick(args.maturity, BASE_MATURITY))

    value = price(args.method, market, contract)
    print(f"{value:.{args.digits}f}")
    if args.terms:
        terms = analytic_terms(market, contract, args.method)
        for name in ("a_t", "i_hat", "sigma_margrabe", "s_ratio", "x_t", "x_star", "vol", "d1", "d2"):
            print(f"{name:<15s}{_fmt(getattr(terms, name))}")
    return EXIT_OK


def cmd_mc(args: argparse.Namespace) -> int:
    market = _market_from_args(args)
    contract = Contract(strike=_pick(args.strike, BASE_STRIKE), maturity=_pick(args.maturity, BASE_MATURITY))
    try:
        config = _mc_from_args(args, McConfig(n_pairs=DEFAULT_MC_PAIRS, seed=DEFAULT_SEED))
    except DomainError as exc:
        raise UsageError(str(exc)) from None

    estimate = mc_price(market, contract, config, workers=args.workers)
    lo, hi = confidence_interval(estimate, args.level)
    print(f"{'mean':<13s}{estimate.mean:.9g}")
    print(f"{'std_error':<13s}{estimate.std_error:.9g}")
    print(f"{'ci_lower':<13s}{lo:.9g}")
    print(f"{'ci_upper':<13s}{hi:.9g}")
    print(f"{'level':<13s}{args.level:g}")
    print(f"{'n_effective':<13s}{estimate.n_effective}")
    return EXIT_OK


def _grid_spec_from_args(args: argparse.Namespace) -> GridSpec:
    base = load_grid_config(args.config) if args.config is not None else GridSpec()
    overrides: dict[str, object] = {}
    for name in ("strikes", "rhos", "maturities"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    rhos = overrides.get("rhos", base.rhos)
    market = replace(_market_from_args(args, base.base_market), rho=rhos[0])
    return replace(
        base,
        base_market=market,
        mc=_mc_from_args(args, base.mc),
        reuse_draws=base.reuse_draws and not args.fresh_draws,
        **overrides,
    )


def _emit_grid(cells: list[GridCell], spec: GridSpec, args: argparse.Namespace) -> None:
    with _open_sink(args.out) as sink:
        rows = write_grid_csv(cells, sink, level=args.level)
    logger.info("wrote %d rows to %s", rows, args.out or "stdout")
    if args.figures is not None:
        paths = write_figure_set(cells, spec, args.figures)
        logger.info("wrote %d figure files under %s", len(paths), args.figures)


def cmd_grid(args: argparse.Namespace) -> int:
    try:
        spec = _grid_spec_from_args(args)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if args.dump_config:
        write_grid_config(spec, sys.stdout)
        return EXIT_OK
    logger.info("grid: %d cells, %d pairs per slice, seed %d", spec.n_cells, spec.mc.n_pairs, spec.mc.seed)
    cells = run_grid(spec, workers=args.workers)
    _emit_grid(cells, spec, args)
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    pairs = args.pairs if args.pairs is not None else (FULL_PAIRS if args.full else DEFAULT_PAIRS)
    spec = GridSpec(mc=McConfig(n_pairs=pairs, seed=_pick(args.seed, DEFAULT_SEED)))
    logger.info("reproduce: %d cells, %d pairs per slice, seed %d", spec.n_cells, pairs, spec.mc.seed)
    cells = run_grid(spec, workers=args.workers)
    _emit_grid(cells, spec, args)

    if args.out is None:
        print()
    print("# reference values at S1=S2=100, sigma1=0.3, sigma2=0.2, r=0, T=0.5")
    for row in reference_comparison(cells):
        where = f"K={row.strike:g} rho={row.rho:g}"
        lo, hi = row.published_interval
        print(f"kirk           {where:<16s} published={row.published_kirk:<12.9g} regenerated={_fmt(row.kirk)}")
        print(f"modified-kirk  {where:<16s} published={row.published_modified_kirk:<12.9g} "
              f"regenerated={_fmt(row.modified_kirk)}")
        print(f"mc             {where:<16s} published=({lo:.9g}, {hi:.9g}) "
              f"regenerated={row.mc_mean:.9g} +/- {row.mc_std_error:.3g} "
              f"{'inside' if row.inside_interval else 'outside'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and entry points
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Spread option pricing: Margrabe, Kirk and modified Kirk against a Monte Carlo benchmark.",
    )
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    verbosity = argparse.ArgumentParser(add_help=False)
    _add_verbosity_args(verbosity)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    # --- price ---
    p_price = sub.add_parser("price", parents=[verbosity], help="closed-form quote")
    p_price.add_argument("--method", choices=METHODS, default="kirk", help="pricer (default kirk)")
    _add_market_args(p_price)
    _add_contract_args(p_price)
    p_price.add_argument("--terms", action="store_true", help="also print the intermediate quantities")
    p_price.add_argument("--digits", type=_integer("in [0, 17]", lambda v: 0 <= v <= 17), default=7,
                         help="decimals of the printed price (default 7)")
    p_price.set_defaults(func=cmd_price)

    # --- mc ---
    p_mc = sub.add_parser("mc", parents=[verbosity], help="Monte Carlo estimate")
    _add_market_args(p_mc)
    _add_contract_args(p_mc)
    _add_mc_args(p_mc, pairs_default=None)
    p_mc.add_argument("--plain", action="store_true",
                      help="independent draws instead of antithetic pairs (same payoff budget)")
    p_mc.set_defaults(func=cmd_mc)

    # --- grid ---
    p_grid = sub.add_parser("grid", parents=[verbosity], help="K x rho x T sweep")
    p_grid.add_argument("--config", type=Path, default=None, help="grid config file (key = value lines)")
    _add_market_args(p_grid, with_rho=False)
    sweep = p_grid.add_argument_group("sweep")
    sweep.add_argument("--strikes", type=_real_list("comma separated, each >= 0", lambda v: v >= 0.0), default=None)
    sweep.add_argument("--rhos", type=_real_list("comma separated, each in [-1, 1]", lambda v: -1.0 <= v <= 1.0),
                       default=None)
    sweep.add_argument("--maturities", type=_real_list("comma separated, each > 0", lambda v: v > 0.0), default=None)
    sweep.add_argument("--fresh-draws", action="store_true",
                       help="simulate each cell separately instead of sharing draws across K")
    _add_mc_args(p_grid, pairs_default=None)
    p_grid.add_argument("--plain", action="store_true", help="independent draws instead of antithetic pairs")
    _add_output_args(p_grid)
    p_grid.add_argument("--dump-config", action="store_true",
                        help="print the effective config in file grammar and exit")
    p_grid.set_defaults(func=cmd_grid)

    # --- reproduce ---
    p_rep = sub.add_parser("reproduce", parents=[verbosity],
                           help="published default sweep and reference tables")
    budget = p_rep.add_mutually_exclusive_group()
    budget.add_argument("--full", action="store_true", help=f"use {FULL_PAIRS:,} pairs per slice")
    budget.add_argument("--pairs", type=_count, default=None, help=f"pairs per slice (default {DEFAULT_PAIRS:,})")
    p_rep.add_argument("--seed", type=_seed, default=None, help=f"RNG seed (default {DEFAULT_SEED})")
    p_rep.add_argument("--workers", type=_count, default=1, help="worker threads; results do not depend on this")
    p_rep.add_argument("--level", type=_open_unit, default=DEFAULT_LEVEL, help="confidence level (default 0.95)")
    _add_output_args(p_rep)
    p_rep.set_defaults(func=cmd_reproduce)

    return parser


def _error(message: str) -> None:
    print(f"{PROG}: error: {message}", file=sys.stderr)


def run(argv: Sequence[str] | None = None) -> int:
    """Parse *argv*, dispatch, and map failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse: 0 after --help/--version, 2 on usage errors.
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    configure_logging(args.verbose - args.quiet)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        _error(str(exc))
        return EXIT_USAGE
    except DomainError as exc:
        _error(str(exc))
        return EXIT_DOMAIN
    except OSError as exc:
        _error(str(exc))
        return EXIT_IO


def main() -> None:
    """Entry point for the ``kirkspread`` console script."""
    sys.exit(run())
