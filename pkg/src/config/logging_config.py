"""Logging setup shared by the shrinkage library and the benchmark CLI.

Every logger gets a console handler on stderr, so `--out -` can stream a CSV
on stdout, and a rotating file handler on logs/benchmark.log that records
per-replication DEBUG detail.
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

ROOT_DIR = Path(__file__).parents[2].absolute()
LOG_DIR = ROOT_DIR / "logs"
BENCH_LOG_FILE = LOG_DIR / "benchmark.log"

CONSOLE_FORMAT = "%(levelname)s - %(message)s"
FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
MAX_LOG_BYTES = 10 * 1024 * 1024
LOG_BACKUPS = 5

_CONSOLE_HANDLERS: list[logging.Handler] = []
_console_level: int | str = logging.INFO


def _console_handler() -> logging.Handler:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    handler.setLevel(_console_level)
    _CONSOLE_HANDLERS.append(handler)
    return handler


def _file_handler() -> logging.Handler:
    LOG_DIR.mkdir(exist_ok=True)
    handler = RotatingFileHandler(
        filename=str(BENCH_LOG_FILE),
        maxBytes=MAX_LOG_BYTES,
        backupCount=LOG_BACKUPS,
    )
    handler.setFormatter(logging.Formatter(FILE_FORMAT))
    handler.setLevel(logging.DEBUG)
    return handler


def get_logger(name: str) -> logging.Logger:
    """Return the named logger, attaching console and file handlers once.

    Args:
        name: Logger name, usually the module name

    Returns:
        Logger that does not propagate to the root logger
    """
    logger = logging.getLogger(name)
    if not logger.handlers:
        logger.addHandler(_console_handler())
        logger.addHandler(_file_handler())
        logger.setLevel(logging.DEBUG)
        logger.propagate = False
    return logger


def set_console_level(level: str | int) -> None:
    """Apply a console level to existing and future loggers.

    Args:
        level: Level name (DEBUG, INFO, WARNING, ERROR, CRITICAL) or number
    """
    global _console_level
    _console_level = level
    for handler in _CONSOLE_HANDLERS:
        handler.setLevel(level)
