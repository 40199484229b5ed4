"""Input validation helpers shared across the package.

Small, estimator-friendly checks in the spirit of ``sklearn.utils.validation``:
every helper either returns a validated ``numpy`` array or raises ``ValueError``
with a message naming the offending argument.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "check_probability_vector",
    "check_probability_rows",
    "check_square_symmetric",
    "check_distance_matrix",
]


def check_probability_vector(v, name: str = "v", tol: float = 1e-9) -> np.ndarray:
    """Validate a 1-D nonnegative vector that sums to 1 within ``tol``."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if np.any(arr < 0):
        raise ValueError(f"{name} has negative entries")
    total = arr.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"{name} sums to {total!r}, expected 1 within {tol}")
    return arr


def check_probability_rows(m, name: str = "m", tol: float = 1e-9) -> np.ndarray:
    """Validate a 2-D array whose rows are probability distributions."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if np.any(arr < 0):
        raise ValueError(f"{name} has negative entries")
    sums = arr.sum(axis=1)
    bad = np.where(np.abs(sums - 1.0) > tol)[0]
    if bad.size:
        raise ValueError(
            f"{name} row {bad[0]} sums to {sums[bad[0]]!r}, expected 1 within {tol}"
        )
    return arr


def check_square_symmetric(m, name: str = "m", tol: float = 1e-12) -> np.ndarray:
    """Validate a square symmetric matrix (within ``tol``)."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if not np.allclose(arr, arr.T, atol=tol, rtol=0.0):
        raise ValueError(f"{name} is not symmetric within {tol}")
    return arr


def check_distance_matrix(m, name: str = "distances") -> np.ndarray:
    """Validate a square symmetric nonnegative matrix with a zero diagonal."""
    arr = check_square_symmetric(m, name=name)
    if np.any(arr < 0):
        raise ValueError(f"{name} has negative entries")
    if np.any(np.abs(np.diag(arr)) > 1e-12):
        raise ValueError(f"{name} has a nonzero diagonal")
    return arr
