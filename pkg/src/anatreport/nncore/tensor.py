"""Array validation helpers shared by all trainable modules.

Everything numeric runs on plain numpy arrays. Training math defaults to
float64; checkpoints store float32 (see checkpoint.py).
"""

from __future__ import annotations

import numpy as np

__all__ = ["ShapeError", "as_matrix", "as_vector", "require_finite", "require_shape"]


class ShapeError(ValueError):
    """Raised when an array does not have the shape an operation requires."""


def as_matrix(x, name: str = "x", dtype=np.float64) -> np.ndarray:
    """Coerce ``x`` to a finite 2-D float array, failing loudly otherwise."""
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    require_finite(arr, name)
    return arr


def as_vector(x, name: str = "x", dtype=np.float64) -> np.ndarray:
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {arr.shape}")
    require_finite(arr, name)
    return arr


def require_finite(arr: np.ndarray, name: str = "array") -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        bad = int(np.size(arr) - np.count_nonzero(np.isfinite(arr)))
        raise ValueError(f"{name} contains {bad} non-finite entries (NaN/Inf)")
    return arr


def require_shape(arr: np.ndarray, shape: tuple, name: str = "array") -> np.ndarray:
    """Check ``arr.shape`` against ``shape``; ``None`` entries match anything."""
    if len(arr.shape) != len(shape) or any(
        want is not None and got != want for got, want in zip(arr.shape, shape)
    ):
        raise ShapeError(f"{name} has shape {arr.shape}, expected {shape}")
    return arr
