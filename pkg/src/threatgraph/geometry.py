"""Camera-to-floor calibration and floor-plane distance geometry.

Two transform modes are provided. `paper_linear` is the closed-form
least-squares 2x2 map M = F R^T (R R^T)^-1 over the four reference
correspondences (R image points, F floor points, both as 2x4 column
matrices). `projective` is the exact four-point homography solve in
homogeneous coordinates, which is the mode that can actually realize a
trapezoid-to-square perspective warp; it is the default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .boxes import Box
from .errors import AtInfinityError, SingularSystemError
from .validation import as_points_array, min_triple_collinearity

W_TOL = 1e-12
RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class FloorPoint:
    """A person's standing location on the floor plane, in meters."""

    x: float
    y: float
    person_id: int = -1
    frame: int = -1

    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


def standing_location(box: Box) -> tuple[float, float]:
    """Image-space ground contact point of a person box: (u, v + 0.5h)."""
    return box.bottom_center()


def _normalization(points: np.ndarray) -> np.ndarray:
    """Similarity transform moving the centroid to the origin and the
    mean distance from it to sqrt(2)."""
    centroid = points.mean(axis=0)
    mean_dist = np.mean(np.linalg.norm(points - centroid, axis=1))
    scale = np.sqrt(2.0) / mean_dist if mean_dist > 0 else 1.0
    return np.array([
        [scale, 0.0, -scale * centroid[0]],
        [0.0, scale, -scale * centroid[1]],
        [0.0, 0.0, 1.0],
    ])


def _solve_homography(image_points: np.ndarray, floor_points: np.ndarray) -> np.ndarray:
    """Direct linear solve for the 3x3 map sending each image point to its
    floor point. Image coordinates are conditioned with a similarity
    normalization that is undone afterwards."""
    T = _normalization(image_points)
    ones = np.ones((4, 1))
    norm_img = (T @ np.hstack([image_points, ones]).T).T[:, :2]

    rows = []
    for (x, y), (xp, yp) in zip(norm_img, floor_points):
        rows.append([x, y, 1, 0, 0, 0, -xp * x, -xp * y, -xp])
        rows.append([0, 0, 0, x, y, 1, -yp * x, -yp * y, -yp])
    A = np.asarray(rows)

    _, s, vt = np.linalg.svd(A)
    # A is 8x9; its 8th singular value vanishing means a >1-dimensional
    # null space, i.e. the four correspondences do not pin down the map.
    if s[0] == 0.0 or s[-1] / s[0] < 1e-12:
        raise SingularSystemError("homography system is rank-deficient")
    H = vt[-1].reshape(3, 3) @ T

    # Scale is arbitrary; pin (3,3) to 1 when it is safely nonzero,
    # otherwise fall back to unit Frobenius norm with a sign convention.
    fro = np.linalg.norm(H)
    if abs(H[2, 2]) > 1e-9 * fro:
        H = H / H[2, 2]
    else:
        H = H / fro
        flat = H.ravel()
        lead = flat[np.nonzero(np.abs(flat) > 1e-12 * np.max(np.abs(flat)))[0][0]]
        if lead < 0:
            H = -H
    return H


class FloorTransform(BaseEstimator, TransformerMixin):
    """Perspective transform from image pixels to floor-plane meters.

    Fit on four reference correspondences; transform maps image points to
    the floor, inverse_transform maps floor points back into the image.

    Parameters
    ----------
    mode : {"projective", "paper_linear"}
        "projective" solves the exact four-point homography;
        "paper_linear" uses the 2x2 least-squares formula.
    """

    def __init__(self, mode: str = "projective"):
        self.mode = mode

    def fit(self, image_points, floor_points):
        if self.mode not in ("projective", "paper_linear"):
            raise ValueError(f"unknown mode {self.mode!r}")
        img = as_points_array(image_points, 4, "image_points")
        flo = as_points_array(floor_points, 4, "floor_points")
        if min_triple_collinearity(img) < 1e-9:
            raise SingularSystemError("three image points are collinear")

        if self.mode == "paper_linear":
            R = img.T            # 2x4
            F = flo.T            # 2x4
            gram = R @ R.T       # 2x2
            det = np.linalg.det(gram)
            if abs(det) <= 1e-12 * max(1.0, np.abs(gram).max() ** 2):
                raise SingularSystemError("R R^T is singular")
            matrix = F @ R.T @ np.linalg.inv(gram)
        else:
            matrix = _solve_homography(img, flo)
            residual = np.linalg.norm(self._apply(matrix, img) - flo, axis=1)
            if residual.max() >= RESIDUAL_TOL:
                raise SingularSystemError(
                    f"projective fit residual {residual.max():.3e} exceeds {RESIDUAL_TOL}")

        if abs(np.linalg.det(matrix)) <= 1e-12:
            raise SingularSystemError("fitted transform is not invertible")

        self.image_points_ = img
        self.floor_points_ = flo
        self.matrix_ = matrix
        return self

    def _apply(self, matrix: np.ndarray, points: np.ndarray) -> np.ndarray:
        if matrix.shape == (2, 2):
            return points @ matrix.T
        homog = np.hstack([points, np.ones((len(points), 1))]) @ matrix.T
        w = homog[:, 2]
        if np.any(np.abs(w) < W_TOL):
            raise AtInfinityError("point projects to the horizon line (w ~ 0)")
        return homog[:, :2] / w[:, None]

    def transform(self, points) -> np.ndarray:
        """Project image points (n, 2) to floor coordinates (n, 2)."""
        pts = as_points_array(points, name="points")
        return self._apply(self.matrix_, pts)

    def inverse_transform(self, points) -> np.ndarray:
        """Map floor points back to image coordinates."""
        pts = as_points_array(points, name="points")
        return self._apply(np.linalg.inv(self.matrix_), pts)


def fit_floor_transform(image_points, floor_points, mode: str = "projective") -> FloorTransform:
    return FloorTransform(mode=mode).fit(image_points, floor_points)


def project_to_floor(calib: FloorTransform, point, person_id: int = -1,
                     frame: int = -1) -> FloorPoint:
    """Project a single image point through a fitted calibration."""
    x, y = calib.transform([point])[0]
    return FloorPoint(float(x), float(y), person_id, frame)


@dataclass
class DistanceMatrix:
    """Pairwise floor distances for one frame, in meters."""

    ids: tuple[int, ...]
    d: np.ndarray

    def distance(self, i: int, j: int) -> float:
        return float(self.d[self.ids.index(i), self.ids.index(j)])


def distance_matrix(points: list[FloorPoint]) -> DistanceMatrix:
    """Euclidean distances between all pairs of floor points."""
    ids = tuple(p.person_id for p in points)
    if not points:
        return DistanceMatrix(ids, np.zeros((0, 0)))
    xy = np.array([[p.x, p.y] for p in points])
    diff = xy[:, None, :] - xy[None, :, :]
    d = np.sqrt((diff ** 2).sum(axis=2))
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(ids, d)
