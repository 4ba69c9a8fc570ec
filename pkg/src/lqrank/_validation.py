"""Input validation helpers shared across the package."""

import numpy as np

__all__ = ["check_matrix", "check_vector", "check_alpha", "check_count"]


def check_matrix(values, min_cols=2, name="values"):
    """Coerce to a 2-D float array of finite observations.

    Parameters
    ----------
    values : array_like
        Candidate n x c matrix.
    min_cols : int
        Minimum number of columns.
    name : str
        Label used in error messages.

    Returns
    -------
    ndarray of shape (n, c), dtype float64, C-contiguous.
    """
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got ndim={arr.ndim}")
    n, c = arr.shape
    if n < 1:
        raise ValueError(f"{name} must have at least one row")
    if c < min_cols:
        raise ValueError(f"{name} must have at least {min_cols} columns, got {c}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_vector(values, name="values"):
    """Coerce to a non-empty 1-D float array of finite values."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D array, got ndim={arr.ndim}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_alpha(alpha, name="alpha"):
    """Validate a level in the open interval (0, 1)."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {alpha}")
    return alpha


def check_count(value, minimum, name):
    """Validate an integer count bounded below."""
    count = int(value)
    if count != value:
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if count < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {count}")
    return count
