"""Cyclic Jacobi eigendecomposition for small symmetric matrices.

Deterministic and dependency-free on purpose: the spectral grouping step
clusters at most a few dozen people per frame, and reproducible golden
outputs matter more than large-n performance here.
"""

from __future__ import annotations

import numpy as np

from .validation import as_square_matrix, check_symmetric

OFFDIAG_TOL = 1e-10
MAX_SWEEPS = 100


def jacobi_eigh(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a real symmetric matrix.

    Returns (eigenvalues, eigenvectors) sorted by ascending eigenvalue,
    eigenvectors as columns. Converges when the off-diagonal Frobenius
    norm drops below 1e-10.
    """
    a = as_square_matrix(matrix, "matrix").copy()
    check_symmetric(a, tol=1e-9)
    n = a.shape[0]
    v = np.eye(n)
    if n < 2:
        return np.diag(a).copy(), v

    for _ in range(MAX_SWEEPS):
        off = np.sqrt(np.sum(np.square(a - np.diag(np.diag(a)))))
        if off < OFFDIAG_TOL:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = 0.5 * np.arctan2(2.0 * apq, a[q, q] - a[p, p])
                c = np.cos(theta)
                s = np.sin(theta)
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :] = rot_p
                a[q, :] = rot_q
                col_p = c * a[:, p] - s * a[:, q]
                col_q = s * a[:, p] + c * a[:, q]
                a[:, p] = col_p
                a[:, q] = col_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vec_p = c * v[:, p] - s * v[:, q]
                vec_q = s * v[:, p] + c * v[:, q]
                v[:, p] = vec_p
                v[:, q] = vec_q

    eigenvalues = np.diag(a).copy()
    order = np.argsort(eigenvalues, kind="stable")
    return eigenvalues[order], v[:, order]
