"""Per-frame social clustering and temporal group confirmation.

Distances become affinities through an elementwise exponential kernel,
each frame is clustered spectrally, and pairs are confirmed as a social
group either by persistent co-clustering (run length of tau seconds) or,
in small scenes, by the naive rule: spending at least a fraction of their
co-visible time within the proximity radius.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .errors import ConfigError, OutOfOrderFrameError
from .geometry import DistanceMatrix
from .jacobi import jacobi_eigh
from .validation import as_square_matrix, check_symmetric

KMEANS_MAX_ITER = 100
KMEANS_MOVE_TOL = 1e-9
# Stand-in for the first "bulk" eigenvalue of the normalized Laplacian
# when the eigengap search runs off the end of the spectrum (k = n).
EIGENGAP_SENTINEL = 1.0


@dataclass(frozen=True)
class GroupingConfig:
    """Tunables for affinity, clustering, and group persistence."""

    alpha: float = 0.25            # affinity decay, 1/meters
    tau_seconds: float = 10.0      # co-clustering persistence window
    naive_threshold_fraction: float = 0.20
    naive_mode_max_people: int = 6
    proximity_radius: float = 1.0  # meters
    cluster_count: int | None = None  # None = auto via eigengap

    def __post_init__(self):
        if self.alpha <= 0 or self.tau_seconds <= 0 or self.proximity_radius <= 0:
            raise ConfigError("alpha, tau_seconds, proximity_radius must be positive")
        if not (0.0 <= self.naive_threshold_fraction <= 1.0):
            raise ConfigError("naive_threshold_fraction must be in [0, 1]")
        if self.naive_mode_max_people < 0:
            raise ConfigError("naive_mode_max_people must be >= 0")
        if self.cluster_count is not None and self.cluster_count < 1:
            raise ConfigError("cluster_count must be >= 1")


@dataclass
class AffinityMatrix:
    """exp(-alpha * distance) similarity between people in one frame."""

    ids: tuple[int, ...]
    a: np.ndarray


@dataclass
class ClusterAssignment:
    """Per-frame cluster labels, contiguous from 0."""

    frame: int
    labels: dict[int, int]


def affinity_from_distance(m_d: DistanceMatrix, alpha: float) -> AffinityMatrix:
    a = np.exp(-alpha * m_d.d)
    if a.size:
        np.fill_diagonal(a, 1.0)
    return AffinityMatrix(m_d.ids, a)


def _farthest_point_init(points: np.ndarray, k: int) -> np.ndarray:
    """Deterministic seeding: start at row 0, then repeatedly take the row
    farthest from its nearest chosen center (ties to the lowest index)."""
    chosen = [0]
    d2 = ((points - points[0]) ** 2).sum(axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(d2))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((points - points[nxt]) ** 2).sum(axis=1))
    return points[chosen].copy()


def _kmeans(points: np.ndarray, k: int) -> np.ndarray:
    centers = _farthest_point_init(points, k)
    labels = np.zeros(len(points), dtype=int)
    for _ in range(KMEANS_MAX_ITER):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)  # argmin ties resolve to the lowest index
        moved = 0.0
        for c in range(k):
            members = points[labels == c]
            if len(members) == 0:
                continue  # empty cluster keeps its previous center
            new_center = members.mean(axis=0)
            moved = max(moved, float(np.abs(new_center - centers[c]).max()))
            centers[c] = new_center
        if moved < KMEANS_MOVE_TOL:
            break
    return labels


def _relabel_contiguous(labels: np.ndarray) -> np.ndarray:
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[i] = mapping[lab]
    return out


class SpectralGrouper(BaseEstimator, ClusterMixin):
    """Spectral clustering over a precomputed affinity matrix.

    Uses the symmetric normalized Laplacian, a cyclic Jacobi eigensolver,
    and a deterministic k-means so identical inputs always produce
    identical labels. With n_clusters="auto" the cluster count is picked
    by the largest eigengap, capped at max_auto_clusters.
    """

    def __init__(self, n_clusters: int | str = "auto", max_auto_clusters: int = 8):
        self.n_clusters = n_clusters
        self.max_auto_clusters = max_auto_clusters

    def fit(self, X, y=None):
        a = as_square_matrix(X, "affinity")
        check_symmetric(a, tol=1e-9, name="affinity")
        n = a.shape[0]
        if n == 0:
            raise ValueError("affinity matrix must have at least one row")
        if n == 1:
            self.eigenvalues_ = np.zeros(1)
            self.n_clusters_ = 1
            self.labels_ = np.zeros(1, dtype=int)
            return self

        degree = a.sum(axis=1)
        inv_sqrt = 1.0 / np.sqrt(degree)
        laplacian = np.eye(n) - (inv_sqrt[:, None] * a * inv_sqrt[None, :])
        # Rotations leave tiny asymmetries; resymmetrize before Jacobi.
        laplacian = 0.5 * (laplacian + laplacian.T)
        eigenvalues, eigenvectors = jacobi_eigh(laplacian)
        self.eigenvalues_ = eigenvalues

        if self.n_clusters == "auto":
            cap = min(n, self.max_auto_clusters)
            padded = np.append(eigenvalues, EIGENGAP_SENTINEL)
            gaps = padded[1:cap + 1] - padded[:cap]
            k = int(np.argmax(gaps)) + 1  # first occurrence = smallest k
        else:
            k = min(int(self.n_clusters), n)
        self.n_clusters_ = k

        embedding = eigenvectors[:, :k]
        norms = np.linalg.norm(embedding, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        embedding = embedding / norms
        self.embedding_ = embedding
        self.labels_ = _relabel_contiguous(_kmeans(embedding, k))
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_


def spectral_cluster(affinity: AffinityMatrix, k: int | None = None,
                     frame: int = -1) -> ClusterAssignment:
    """Cluster one frame's affinity matrix into a ClusterAssignment."""
    grouper = SpectralGrouper(n_clusters="auto" if k is None else k)
    labels = grouper.fit_predict(affinity.a)
    return ClusterAssignment(frame, {pid: int(lab) for pid, lab in zip(affinity.ids, labels)})


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass
class GroupState:
    """Accumulated pairwise evidence for social-group membership."""

    run_lengths: dict[tuple[int, int], int] = field(default_factory=dict)
    confirmed: set[tuple[int, int]] = field(default_factory=set)
    proximity_counts: dict[tuple[int, int], int] = field(default_factory=dict)
    frames_observed: dict[tuple[int, int], int] = field(default_factory=dict)
    last_frame: int | None = None


def update_groups(state: GroupState, assignment: ClusterAssignment,
                  m_d: DistanceMatrix, config: GroupingConfig, fps: float) -> GroupState:
    """Fold one frame's clustering into the group state.

    Scenes with at most naive_mode_max_people use the naive proximity-time
    rule for confirmation; larger scenes require tau seconds of
    uninterrupted co-clustering. Confirmed pairs stay confirmed.
    """
    if state.last_frame is not None and assignment.frame <= state.last_frame:
        raise OutOfOrderFrameError(
            f"frame {assignment.frame} not after {state.last_frame}")

    ids = sorted(assignment.labels)
    naive = len(ids) <= config.naive_mode_max_people
    run_threshold = int(round(config.tau_seconds * fps))

    for a_idx in range(len(ids)):
        for b_idx in range(a_idx + 1, len(ids)):
            pair = _pair(ids[a_idx], ids[b_idx])
            state.frames_observed[pair] = state.frames_observed.get(pair, 0) + 1
            if m_d.distance(*pair) <= config.proximity_radius:
                state.proximity_counts[pair] = state.proximity_counts.get(pair, 0) + 1
            if assignment.labels[pair[0]] == assignment.labels[pair[1]]:
                state.run_lengths[pair] = state.run_lengths.get(pair, 0) + 1
            else:
                state.run_lengths[pair] = 0

            if naive:
                fraction = (state.proximity_counts.get(pair, 0)
                            / state.frames_observed[pair])
                if fraction >= config.naive_threshold_fraction:
                    state.confirmed.add(pair)
            elif state.run_lengths[pair] >= run_threshold:
                state.confirmed.add(pair)

    state.last_frame = assignment.frame
    return state


def group_indicator(state: GroupState, i: int, j: int) -> int:
    """1 if the pair has been confirmed as a social group, else 0."""
    return 1 if _pair(i, j) in state.confirmed else 0
