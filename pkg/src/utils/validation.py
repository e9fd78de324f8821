"""Validation helpers for matrices and experiment arguments."""

import numpy as np
from numpy.typing import NDArray

from src.utils.error_handling import InvalidInputError


def validate_square(a: NDArray, name: str = "matrix") -> NDArray:
    """Validate that an array is a finite square matrix.

    Args:
        a: Array to check
        name: Name used in error messages

    Returns:
        The input as a float64 array

    Raises:
        InvalidInputError: If the array is not a finite square matrix
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def validate_symmetric(a: NDArray, tol: float, name: str = "matrix") -> NDArray:
    """Validate that a square matrix is symmetric within a relative tolerance.

    Args:
        a: Matrix to check
        tol: Largest tolerated |a_ij - a_ji| relative to max(1, max |a_ij|)
        name: Name used in error messages

    Returns:
        The input as a float64 array

    Raises:
        InvalidInputError: If the matrix is not square or not symmetric
    """
    a = validate_square(a, name)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > tol * scale:
        raise InvalidInputError(
            f"{name} is not symmetric (max asymmetry {asym:.3e} > {tol * scale:.3e})"
        )
    return a


def validate_positive_spectrum(values: NDArray, name: str = "spectrum") -> NDArray:
    """Validate that a one-dimensional spectrum is finite and strictly positive.

    Args:
        values: Eigenvalues to check
        name: Name used in error messages

    Returns:
        The input as a float64 vector

    Raises:
        InvalidInputError: If any eigenvalue is nonpositive or non-finite
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise InvalidInputError(f"{name} must contain strictly positive eigenvalues")
    return values


def validate_dimensions(**dims: int) -> None:
    """Validate that every named dimension is a positive integer.

    Args:
        **dims: Dimensions keyed by their name

    Raises:
        InvalidInputError: If a dimension is not a positive integer
    """
    for name, value in dims.items():
        if isinstance(value, bool) or not isinstance(value, int | np.integer):
            raise InvalidInputError(f"{name} must be an integer, got {value!r}")
        if value < 1:
            raise InvalidInputError(f"{name} must be >= 1, got {value}")


def relative_frobenius_error(actual: NDArray, expected: NDArray) -> float:
    """Frobenius norm of the difference relative to the expected matrix.

    Args:
        actual: Computed matrix
        expected: Reference matrix

    Returns:
        ||actual - expected||_F / ||expected||_F, or the absolute norm when the
        reference is zero
    """
    diff = float(np.linalg.norm(np.asarray(actual) - np.asarray(expected)))
    scale = float(np.linalg.norm(expected))
    return diff / scale if scale > 0 else diff
