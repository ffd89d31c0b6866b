"""Logging setup for the console script.

Library modules only call ``logging.getLogger(__name__)``; handlers are installed
here, once, by the CLI.  Log records go to standard error through rich so that
standard output stays reserved for results.
"""

from __future__ import annotations

import logging

from rich.console import Console
from rich.logging import RichHandler

_ROOT = "kirkspread"


def configure_logging(verbosity: int = 0) -> logging.Logger:
    """Install a stderr RichHandler on the package logger.

    *verbosity*: -1 quiet (WARNING), 0 default (INFO), >= 1 verbose (DEBUG).
    Calling it again replaces the previous handler.
    """
    if verbosity < 0:
        level = logging.WARNING
    elif verbosity == 0:
        level = logging.INFO
    else:
        level = logging.DEBUG

    logger = logging.getLogger(_ROOT)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler = RichHandler(
        console=Console(stderr=True),
        show_path=verbosity > 0,
        show_time=verbosity > 0,
        markup=False,
        rich_tracebacks=False,
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
    return logger
