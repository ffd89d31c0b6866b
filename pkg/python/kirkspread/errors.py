"""
Exception hierarchy and process exit codes for kirkspread.

Every error the library raises derives from :class:`KirkSpreadError`, so callers
(and the CLI) can catch the package's failures without swallowing programming
errors.  The concrete classes also derive from the matching builtin so plain
``except ValueError`` / ``except OSError`` handlers keep working.
"""

from __future__ import annotations

# Exit codes used by the console script.
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4


class KirkSpreadError(Exception):
    """Root of all kirkspread errors."""


class DomainError(KirkSpreadError, ValueError):
    """An input violates a type invariant or the result is mathematically undefined."""


class ConfigError(KirkSpreadError, ValueError):
    """A grid config file could not be parsed."""

    def __init__(self, message: str, *, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SinkError(KirkSpreadError, OSError):
    """Writing to an output sink failed part-way."""

    def __init__(self, message: str, *, rows_written: int) -> None:
        self.rows_written = rows_written
        super().__init__(f"{message} (after {rows_written} data rows)")


class UsageError(KirkSpreadError):
    """A command line combines flags that cannot be used together."""
