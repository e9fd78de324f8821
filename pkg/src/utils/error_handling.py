"""Exceptions and error-handling decorators for the shrinkage library and benchmarks."""

import functools
import time
from collections.abc import Callable
from typing import Any, TypeVar, cast

from src.config.logging_config import get_logger

logger = get_logger(__name__)

F = TypeVar("F", bound=Callable[..., Any])
T = TypeVar("T")


class ShrinkageError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(ShrinkageError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateSampleError(ShrinkageError):
    """A sampled S has numerical rank 0 and cannot be decomposed."""


class NearTieError(ShrinkageError):
    """Two eigenvalues are closer than the tie tolerance of the divided differences."""


class ReplicationBudgetError(ShrinkageError):
    """Too many Monte-Carlo replications were skipped for the run to be trusted."""


class InvalidConfigError(ShrinkageError, ValueError):
    """An experiment configuration is invalid (CLI exit code 2)."""


class CheckFailedError(ShrinkageError):
    """A verification check failed (CLI exit code 1)."""


def retry(
    exceptions: type[Exception] | tuple[type[Exception], ...],
    tries: int = 3,
    delay: float = 1.0,
    backoff: float = 2.0,
) -> Callable[[F], F]:
    """Retry a result write that hit a transient error.

    Args:
        exceptions: The exception(s) treated as transient
        tries: Total number of attempts, at least 1
        delay: Wait before the second attempt, in seconds
        backoff: Factor applied to the wait after every failed attempt

    Returns:
        Decorated function; the last error is re-raised once attempts run out
    """
    if tries < 1:
        raise InvalidInputError(f"retry needs tries >= 1, got {tries}")

    def decorator(func: F) -> F:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            wait = delay
            for attempt in range(1, tries + 1):
                try:
                    return func(*args, **kwargs)
                except exceptions as e:
                    if attempt == tries:
                        logger.error(f"{func.__name__} failed after {tries} attempts")
                        raise
                    logger.warning(
                        f"{func.__name__} attempt {attempt}/{tries} failed ({e}); "
                        f"next attempt in {wait:g}s"
                    )
                    time.sleep(wait)
                    wait *= backoff

        return cast("F", wrapper)

    return decorator


def skip_on(
    exceptions: type[Exception] | tuple[type[Exception], ...],
    default_value: T,
) -> Callable[[F], Callable[..., Any]]:
    """Decorator turning a per-replication failure into a logged skip.

    Args:
        exceptions: The exception(s) that mark a replication as unusable
        default_value: The value returned in place of the replication result

    Returns:
        Decorated function that returns default_value when one of the
        exceptions is raised
    """

    def decorator(func: F) -> Callable[..., Any]:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            try:
                return func(*args, **kwargs)
            except exceptions as e:
                logger.debug(f"Skipping replication in {func.__name__}: {e}")
                return default_value

        return wrapper

    return decorator


def check_skip_budget(skipped: int, reps: int, max_fraction: float = 0.01) -> None:
    """Abort a run whose skipped replications reach the allowed fraction.

    Args:
        skipped: Number of replications skipped
        reps: Number of replications requested
        max_fraction: Largest tolerated share of skipped replications

    Raises:
        ReplicationBudgetError: If skipped >= max_fraction * reps and skipped > 0
    """
    if skipped > 0 and skipped >= max_fraction * reps:
        raise ReplicationBudgetError(
            f"{skipped} of {reps} replications skipped "
            f"(limit {max_fraction:.1%}); results would be biased"
        )
    if skipped:
        logger.warning(f"{skipped} of {reps} replications skipped")
