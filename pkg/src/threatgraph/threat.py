"""Pairwise and per-frame transmission threat scoring.

Each unordered pair contributes (p_h + p_d) * (eps_m - q_m) * (eps_g - q_g):
primary features (proximity probability, handshake probability) add,
secondary discounts (masks, shared social group) multiply. With the
default eps values a same-group pair contributes exactly zero. Only
relative changes of the frame total are meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigError
from .graph import FrameGraph, TemporalGraph


@dataclass(frozen=True)
class ThreatParams:
    """Threat equation tunables.

    epsilon_* >= 1 control how strongly each secondary feature discounts
    a pair's threat. proximity_threshold is the distance treated as
    "extremely close" (probability 1); beyond it the proximity
    probability decays as exp(-beta * (d - threshold)).
    """

    epsilon_m: float = 2.0
    epsilon_g: float = 1.0
    proximity_threshold: float = 1.0  # meters
    beta: float = 1.0                 # 1/meters
    unknown_mask_policy: str = "worst_case"  # or "neutral"
    mask_aggregation: str = "min"            # or "mean"

    def __post_init__(self):
        if self.epsilon_m < 1.0 or self.epsilon_g < 1.0:
            raise ConfigError("epsilon values must be >= 1")
        if self.proximity_threshold <= 0:
            raise ConfigError("proximity_threshold must be positive")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")
        if self.unknown_mask_policy not in ("worst_case", "neutral"):
            raise ConfigError(f"unknown_mask_policy {self.unknown_mask_policy!r}")
        if self.mask_aggregation not in ("min", "mean"):
            raise ConfigError(f"mask_aggregation {self.mask_aggregation!r}")


@dataclass(frozen=True)
class PairFeatures:
    """Assembled per-pair inputs to the threat equation, all in [0, 1]."""

    p_d: float
    p_h: float
    q_m: float
    q_g: int


@dataclass
class ThreatReport:
    """One frame's threat breakdown and activity matrices."""

    frame: int
    ids: tuple[int, ...]
    pair_threat: dict[tuple[int, int], float]
    total: float
    distance: np.ndarray
    group: np.ndarray
    interaction: np.ndarray
    threat: np.ndarray


def proximity_probability(distance: float, params: ThreatParams) -> float:
    """Probability of being "extremely close": 1 inside the threshold,
    exponential tail beyond it (continuous at the threshold)."""
    if distance < 0:
        raise ValueError("distance must be >= 0")
    if distance <= params.proximity_threshold:
        return 1.0
    return math.exp(-params.beta * (distance - params.proximity_threshold))


def _mask_value(mask: tuple[float, float] | None, params: ThreatParams) -> float:
    if mask is None:
        return 0.0 if params.unknown_mask_policy == "worst_case" else 0.5
    return mask[0]


def pair_features(graph: FrameGraph, groups: set[tuple[int, int]],
                  params: ThreatParams, i: int, j: int) -> PairFeatures:
    """Assemble the threat features for one vertex pair of a frame."""
    a, b = sorted((i, j))
    va, vb = graph.vertex(a), graph.vertex(b)
    distance = math.hypot(va.location.x - vb.location.x,
                          va.location.y - vb.location.y)
    p_d = proximity_probability(distance, params)
    edge = graph.edges.get((a, b))
    p_h = edge[1] if edge is not None and edge[0] == 1 else 0.0
    cm_a = _mask_value(va.mask, params)
    cm_b = _mask_value(vb.mask, params)
    if params.mask_aggregation == "min":
        q_m = min(cm_a, cm_b)
    else:
        q_m = 0.5 * (cm_a + cm_b)
    q_g = 1 if (a, b) in groups else 0
    return PairFeatures(p_d=p_d, p_h=p_h, q_m=q_m, q_g=q_g)


def generic_pair_threat(primaries: Iterable[float],
                        secondaries: Iterable[tuple[float, float]]) -> float:
    """Sum of primary probabilities times the product of per-secondary
    (epsilon - q) discount terms."""
    total = sum(primaries)
    for q, eps in secondaries:
        total *= (eps - q)
    return total


def pair_threat(features: PairFeatures, params: ThreatParams) -> float:
    return generic_pair_threat(
        (features.p_h, features.p_d),
        ((features.q_m, params.epsilon_m), (features.q_g, params.epsilon_g)),
    )


def frame_threat(graph: FrameGraph, groups: set[tuple[int, int]],
                 params: ThreatParams) -> ThreatReport:
    """Score one frame: pairwise threats, their sum, and the four
    activity matrices (distance, group, interaction, threat)."""
    ids = tuple(graph.vertex_ids())
    n = len(ids)
    index = {pid: k for k, pid in enumerate(ids)}
    distance = np.zeros((n, n))
    group = np.zeros((n, n))
    interaction = np.zeros((n, n))
    threat = np.zeros((n, n))
    pair_values: dict[tuple[int, int], float] = {}

    locations = {v.person_id: (v.location.x, v.location.y) for v in graph.vertices}
    for ai in range(n):
        for bi in range(ai + 1, n):
            a, b = ids[ai], ids[bi]
            xa, ya = locations[a]
            xb, yb = locations[b]
            distance[ai, bi] = distance[bi, ai] = math.hypot(xa - xb, ya - yb)
            feats = pair_features(graph, groups, params, a, b)
            value = pair_threat(feats, params)
            pair_values[(a, b)] = value
            threat[ai, bi] = threat[bi, ai] = value
            group[ai, bi] = group[bi, ai] = feats.q_g
            edge = graph.edges.get((a, b))
            if edge is not None and edge[0] == 1:
                interaction[ai, bi] = interaction[bi, ai] = 1.0
    for k in range(n):
        group[k, k] = 1.0

    total = float(sum(pair_values.values()))
    return ThreatReport(
        frame=graph.frame, ids=ids, pair_threat=pair_values, total=total,
        distance=distance, group=group, interaction=interaction, threat=threat,
    )


def threat_series(g: TemporalGraph, params: ThreatParams,
                  groups: set[tuple[int, int]] | None = None) -> list[ThreatReport]:
    """One ThreatReport per frame, in frame order. Uses the graph's
    confirmed group set unless an explicit one is given."""
    confirmed = g.confirmed_groups if groups is None else groups
    return [frame_threat(fg, confirmed, params) for fg in g.ordered_frames()]
