"""Input validation helpers shared by the estimator-style APIs."""

from __future__ import annotations

import numpy as np


def as_points_array(points, n_points: int | None = None, name: str = "points") -> np.ndarray:
    """Coerce to a float64 (n, 2) array and check finiteness."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must have shape (n, 2), got {arr.shape}")
    if n_points is not None and arr.shape[0] != n_points:
        raise ValueError(f"{name} must have {n_points} rows, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def collinearity_margin(a, b, c) -> float:
    """|cross product| of (b - a) and (c - a), normalized by segment lengths.

    Zero means collinear (or coincident points); 1 means perpendicular.
    """
    ab = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    ac = np.asarray(c, dtype=float) - np.asarray(a, dtype=float)
    nab = float(np.hypot(*ab))
    nac = float(np.hypot(*ac))
    if nab == 0.0 or nac == 0.0:
        return 0.0
    return abs(ab[0] * ac[1] - ab[1] * ac[0]) / (nab * nac)


def min_triple_collinearity(points: np.ndarray) -> float:
    """Smallest collinearity margin over all point triples."""
    n = len(points)
    best = float("inf")
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                best = min(best, collinearity_margin(points[i], points[j], points[k]))
    return best


def as_square_matrix(m, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_symmetric(m: np.ndarray, tol: float = 1e-9, name: str = "matrix") -> None:
    if m.size and np.max(np.abs(m - m.T)) > tol:
        raise ValueError(f"{name} is not symmetric within {tol}")
