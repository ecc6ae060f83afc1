"""Small input-validation helpers shared by the public entry points."""

from __future__ import annotations

import numpy as np


def as_float_matrix(a, name: str, rows: int | None = None,
                    cols: int | None = None) -> np.ndarray:
    M = np.asarray(a, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got ndim={M.ndim}")
    if rows is not None and M.shape[0] != rows:
        raise ValueError(f"{name} must have {rows} rows, got {M.shape[0]}")
    if cols is not None and M.shape[1] != cols:
        raise ValueError(f"{name} must have {cols} columns, got {M.shape[1]}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def as_float_vector(a, name: str, size: int | None = None) -> np.ndarray:
    v = np.asarray(a, dtype=float).reshape(-1)
    if size is not None and v.size != size:
        raise ValueError(f"{name} must have length {size}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def as_symmetric(a, name: str, tol: float = 1e-12) -> np.ndarray:
    M = as_float_matrix(a, name)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got {M.shape}")
    if np.abs(M - M.T).max() > tol * max(1.0, np.abs(M).max()):
        raise ValueError(f"{name} is not symmetric within {tol}")
    return (M + M.T) / 2.0
