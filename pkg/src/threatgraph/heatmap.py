"""Activity-matrix rendering as plain-text portable graymaps (P2).

Dependency-free and diffable: one pixel per matrix cell, values scaled
linearly from the given range onto 0..255. Passing a reversed range
(lo > hi) flips the polarity, which is how distance matrices are drawn
brighter-when-closer.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .validation import as_square_matrix

MAX_GRAY = 255


def matrix_to_pgm(matrix, value_range: tuple[float, float]) -> str:
    m = as_square_matrix(matrix, "matrix")
    if m.shape[0] < 1:
        raise ValueError("matrix must be at least 1x1")
    lo, hi = float(value_range[0]), float(value_range[1])
    if lo == hi:
        raise ValueError("value_range must span a nonzero interval")

    scaled = (m - lo) / (hi - lo)
    pixels = np.clip(np.floor(scaled * MAX_GRAY + 0.5), 0, MAX_GRAY).astype(int)
    n = m.shape[0]
    lines = ["P2", f"{n} {n}", str(MAX_GRAY)]
    lines.extend(" ".join(str(p) for p in row) for row in pixels)
    return "\n".join(lines) + "\n"


def render_heatmap(matrix, value_range: tuple[float, float], path) -> None:
    """Write the matrix as a P2 graymap; higher in-range values render
    brighter (reverse the range to invert)."""
    Path(path).write_text(matrix_to_pgm(matrix, value_range), encoding="utf-8")
