"""
Result files and sweep configs.

CSV output is byte-deterministic: fixed column order, ``LF`` line endings, and
numbers rendered with Python's locale-independent ``%.9g``.  Undefined values
become empty fields and the reason is recorded as a token in ``flags``
(tokens joined with ``;``).

Config grammar (``grid --config``)::

    # comment
    strikes    = 0, 1, 2, 3          # lists: comma separated
    rhos       = 0.8, 0.9, 0.999
    maturities = 0.5
    s1 = 100                          # scalars
    pairs = 1000000
    antithetic = true                 # booleans: true/false/yes/no/1/0

Unknown or repeated keys are errors; absent keys keep the published defaults.
"""

from __future__ import annotations

import csv
import math
from dataclasses import replace
from pathlib import Path
from typing import Callable, Iterable, TextIO

from kirkspread.analytic import MarketInputs
from kirkspread.errors import ConfigError, DomainError, SinkError
from kirkspread.grid import GridCell, GridSpec, select_slice
from kirkspread.mc import McConfig, normal_interval

CSV_COLUMNS: tuple[str, ...] = (
    "T", "rho", "K",
    "mc_mean", "mc_std_error", "ci_lower", "ci_upper",
    "kirk", "modified_kirk",
    "err_kirk_pct", "err_modified_pct",
    "flags",
)
CSV_HEADER = ",".join(CSV_COLUMNS)
FIGURE_COLUMNS: tuple[str, ...] = ("K", "err_kirk_pct", "err_modified_pct")
SURFACE_COLUMNS: tuple[str, ...] = ("rho", "K", "err_kirk_pct", "err_modified_pct")
FLAG_SEPARATOR = ";"


def format_number(value: float | None) -> str:
    """Nine significant digits, empty for None."""
    if value is None:
        return ""
    return f"{value:.9g}"


def _writer(destination: TextIO):
    return csv.writer(destination, lineterminator="\n")


def _emit(destination: TextIO, header: Iterable[str], rows: Iterable[list[str]], what: str) -> int:
    writer = _writer(destination)
    written = 0
    try:
        writer.writerow(list(header))
        for row in rows:
            writer.writerow(row)
            written += 1
    except OSError as exc:
        raise SinkError(f"cannot write {what}: {exc}", rows_written=written) from exc
    return written


# ---------------------------------------------------------------------------
# Grid CSV
# ---------------------------------------------------------------------------
def _grid_row(cell: GridCell, level: float) -> list[str]:
    lo, hi = normal_interval(cell.mc_mean, cell.mc_std_error, level)
    return [
        format_number(cell.maturity),
        format_number(cell.rho),
        format_number(cell.strike),
        format_number(cell.mc_mean),
        format_number(cell.mc_std_error),
        format_number(lo),
        format_number(hi),
        format_number(cell.kirk),
        format_number(cell.modified_kirk),
        format_number(cell.err_kirk_pct),
        format_number(cell.err_modified_pct),
        FLAG_SEPARATOR.join(cell.flags),
    ]


def write_grid_csv(cells: Iterable[GridCell], destination: TextIO, *, level: float = 0.95) -> int:
    """Write the header and one row per cell, in the given order.

    ``ci_lower``/``ci_upper`` are the two-sided normal interval at *level*.
    Returns the number of data rows.  A failing sink raises SinkError carrying
    the rows already written.
    """
    return _emit(destination, CSV_COLUMNS, (_grid_row(c, level) for c in cells), "grid CSV")


def _optional(text: str) -> float | None:
    return float(text) if text != "" else None


def read_grid_csv(source: TextIO) -> list[GridCell]:
    """Parse CSV produced by :func:`write_grid_csv` back into cells."""
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DomainError("grid CSV is empty; expected a header row") from None
    if tuple(header) != CSV_COLUMNS:
        raise DomainError(f"unexpected grid CSV header: {','.join(header)!r}")

    cells = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise DomainError(
                f"grid CSV line {reader.line_num}: expected {len(CSV_COLUMNS)} fields, got {len(row)}"
            )
        rec = dict(zip(CSV_COLUMNS, row))
        cells.append(
            GridCell(
                strike=float(rec["K"]),
                rho=float(rec["rho"]),
                maturity=float(rec["T"]),
                mc_mean=float(rec["mc_mean"]),
                mc_std_error=float(rec["mc_std_error"]),
                kirk=_optional(rec["kirk"]),
                modified_kirk=_optional(rec["modified_kirk"]),
                err_kirk_pct=_optional(rec["err_kirk_pct"]),
                err_modified_pct=_optional(rec["err_modified_pct"]),
                flags=tuple(t for t in rec["flags"].split(FLAG_SEPARATOR) if t),
            )
        )
    return cells


# ---------------------------------------------------------------------------
# Figure data
# ---------------------------------------------------------------------------
def write_figure_data(cells: Iterable[GridCell], rho: float, maturity: float, destination: TextIO) -> int:
    """Error-vs-K series of one (rho, T) slice: K, err_kirk_pct, err_modified_pct."""
    slice_cells = select_slice(cells, rho, maturity)
    rows = (
        [format_number(c.strike), format_number(c.err_kirk_pct), format_number(c.err_modified_pct)]
        for c in slice_cells
    )
    return _emit(destination, FIGURE_COLUMNS, rows, f"figure data for rho={rho:g}, T={maturity:g}")


def write_surface_data(cells: Iterable[GridCell], maturity: float, destination: TextIO) -> int:
    """K x rho error surfaces at one maturity, rho-major then K."""
    chosen = [c for c in cells if math.isclose(c.maturity, maturity, rel_tol=1e-12, abs_tol=1e-12)]
    if not chosen:
        raise DomainError(f"no grid cells at T={maturity!r}")
    chosen.sort(key=lambda c: (c.rho, c.strike))
    rows = (
        [format_number(c.rho), format_number(c.strike),
         format_number(c.err_kirk_pct), format_number(c.err_modified_pct)]
        for c in chosen
    )
    return _emit(destination, SURFACE_COLUMNS, rows, f"surface data for T={maturity:g}")


def figure_filename(rho: float, maturity: float) -> str:
    return f"figure_rho{rho:g}_T{maturity:g}.csv"


def surface_filename(maturity: float) -> str:
    return f"surface_T{maturity:g}.csv"


def write_figure_set(cells: list[GridCell], spec: GridSpec, directory: Path) -> list[Path]:
    """One figure file per (rho, T) slice and one surface file per T under *directory*."""
    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for maturity in spec.maturities:
        for rho in spec.rhos:
            path = directory / figure_filename(rho, maturity)
            with path.open("w", encoding="utf-8", newline="") as fh:
                write_figure_data(cells, rho, maturity, fh)
            written.append(path)
        path = directory / surface_filename(maturity)
        with path.open("w", encoding="utf-8", newline="") as fh:
            write_surface_data(cells, maturity, fh)
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------
def parse_int(text: str) -> int:
    """Integer, also accepting integral float spellings such as ``1e6``."""
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if not value.is_integer():
            raise ValueError(f"not an integer: {text!r}") from None
        return int(value)


def parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    items = [t.strip() for t in text.split(",")]
    if any(not t for t in items):
        raise ValueError(f"empty list element in {text!r}")
    return tuple(float(t) for t in items)


_LIST_KEYS: dict[str, Callable[[str], tuple[float, ...]]] = {
    "strikes": _float_list,
    "rhos": _float_list,
    "maturities": _float_list,
}
_MARKET_KEYS = {"s1": "s1_0", "s2": "s2_0", "sigma1": "sigma1", "sigma2": "sigma2", "r": "r"}
_MC_KEYS: dict[str, tuple[str, Callable[[str], object]]] = {
    "pairs": ("n_pairs", parse_int),
    "seed": ("seed", parse_int),
    "batch_size": ("batch_size", parse_int),
    "antithetic": ("antithetic", parse_bool),
}
CONFIG_KEYS: tuple[str, ...] = (*_LIST_KEYS, *_MARKET_KEYS, *_MC_KEYS, "reuse_draws")


def parse_grid_config(text: str, *, base: GridSpec | None = None) -> GridSpec:
    """Build a GridSpec from config text; keys absent from *text* come from *base*."""
    base = base or GridSpec()
    seen: dict[str, int] = {}
    grid_fields: dict[str, object] = {}
    market_fields: dict[str, float] = {}
    mc_fields: dict[str, object] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}; known keys: {', '.join(CONFIG_KEYS)}", line=lineno)
        if key in seen:
            raise ConfigError(f"key {key!r} repeated (first set on line {seen[key]})", line=lineno)
        if not value:
            raise ConfigError(f"key {key!r} has no value", line=lineno)
        seen[key] = lineno

        try:
            if key in _LIST_KEYS:
                grid_fields[key] = _LIST_KEYS[key](value)
            elif key in _MARKET_KEYS:
                market_fields[_MARKET_KEYS[key]] = float(value)
            elif key in _MC_KEYS:
                name, parse = _MC_KEYS[key]
                mc_fields[name] = parse(value)
            else:
                grid_fields["reuse_draws"] = parse_bool(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", line=lineno) from None

    try:
        rhos = grid_fields.get("rhos", base.rhos)
        market = replace(base.base_market, rho=rhos[0], **market_fields)
        mc = replace(base.mc, **mc_fields)
        return replace(base, base_market=market, mc=mc, **grid_fields)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def load_grid_config(path: Path, *, base: GridSpec | None = None) -> GridSpec:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_grid_config(text, base=base)


def write_grid_config(spec: GridSpec, destination: TextIO) -> None:
    """Render *spec* in the config grammar; parse_grid_config reads it back."""

    def num(value: float) -> str:
        return repr(float(value))

    def join(values: Iterable[float]) -> str:
        return ", ".join(num(v) for v in values)

    market: MarketInputs = spec.base_market
    mc: McConfig = spec.mc
    lines = [
        "# kirkspread grid config",
        f"strikes = {join(spec.strikes)}",
        f"rhos = {join(spec.rhos)}",
        f"maturities = {join(spec.maturities)}",
        f"s1 = {num(market.s1_0)}",
        f"s2 = {num(market.s2_0)}",
        f"sigma1 = {num(market.sigma1)}",
        f"sigma2 = {num(market.sigma2)}",
        f"r = {num(market.r)}",
        f"pairs = {mc.n_pairs}",
        f"seed = {mc.seed}",
        f"batch_size = {mc.batch_size}",
        f"antithetic = {'true' if mc.antithetic else 'false'}",
        f"reuse_draws = {'true' if spec.reuse_draws else 'false'}",
    ]
    destination.write("\n".join(lines) + "\n")
