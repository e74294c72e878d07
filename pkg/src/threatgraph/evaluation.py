"""Detector and threat-direction evaluation.

AP follows the all-point interpolated area under the precision/recall
curve at a fixed IoU; the threat comparison scores predicted
increase/decrease of the frame threat against expert frame-pair votes
after a minimum-majority filter.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boxes import Box, iou
from .errors import (
    EmptyGroundTruthError,
    MalformedLineError,
    MissingFrameError,
    NoDefinedClassesError,
)
from .ingest import DetectionRecord, StreamConfig, parse_detection_line

MAJORITY_THRESHOLD = 0.70


@dataclass(frozen=True)
class GroundTruthRecord:
    """A detection record plus its annotated class label."""

    record: DetectionRecord
    class_label: str


@dataclass(frozen=True)
class FramePairLabel:
    """Expert votes on whether threat rises from frame t1 to frame t2."""

    t1: int
    t2: int
    votes_increase: int
    votes_decrease: int

    def __post_init__(self):
        if self.votes_increase < 0 or self.votes_decrease < 0:
            raise ValueError("vote counts must be >= 0")
        if self.votes_increase + self.votes_decrease < 1:
            raise ValueError("at least one vote required")


@dataclass(frozen=True)
class DirectedLabel:
    t1: int
    t2: int
    direction: str  # "increase" or "decrease"


@dataclass
class EvalReport:
    """Confusion counts for the threat-direction comparison.

    "increase" is the positive class. Metrics are None (undefined), not
    zero, when their denominator vanishes. zero_diff counts pairs whose
    predicted threat difference was exactly zero; these are scored as
    disagreements with whichever label they carry.
    """

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    zero_diff: int = 0
    excluded_pairs: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float | None:
        return (self.tp + self.tn) / self.total if self.total else None

    @property
    def precision(self) -> float | None:
        denom = self.tp + self.fp
        return self.tp / denom if denom else None

    @property
    def recall(self) -> float | None:
        denom = self.tp + self.fn
        return self.tp / denom if denom else None


def compute_ap(detections: list[tuple[int, Box]],
               ground_truth: list[tuple[int, Box]],
               iou_threshold: float = 0.5) -> float:
    """Average precision of detections against same-frame ground truth.

    Detections are ranked by confidence; each greedily claims the
    highest-IoU unmatched ground-truth box of its frame with IoU at or
    above the threshold. AP is the all-point interpolated area under the
    precision/recall curve.
    """
    if not ground_truth:
        raise EmptyGroundTruthError("AP undefined with no ground-truth boxes")
    if not detections:
        return 0.0

    gt_by_frame: dict[int, list[Box]] = {}
    for frame, box in ground_truth:
        gt_by_frame.setdefault(frame, []).append(box)
    matched: dict[int, list[bool]] = {f: [False] * len(b) for f, b in gt_by_frame.items()}

    order = sorted(range(len(detections)), key=lambda i: -detections[i][1].conf)
    hits = np.zeros(len(detections), dtype=bool)
    for rank, det_idx in enumerate(order):
        frame, box = detections[det_idx]
        best_iou, best_gt = 0.0, None
        for gt_idx, gt_box in enumerate(gt_by_frame.get(frame, [])):
            if matched[frame][gt_idx]:
                continue
            overlap = iou(box, gt_box)
            if overlap >= iou_threshold and overlap > best_iou:
                best_iou, best_gt = overlap, gt_idx
        if best_gt is not None:
            matched[frame][best_gt] = True
            hits[rank] = True

    cum_tp = np.cumsum(hits)
    cum_fp = np.cumsum(~hits)
    precisions = cum_tp / (cum_tp + cum_fp)
    recalls = cum_tp / len(ground_truth)
    interp = np.maximum.accumulate(precisions[::-1])[::-1]
    prev = np.concatenate([[0.0], recalls[:-1]])
    return float(np.sum((recalls - prev) * interp))


def compute_map(per_class_ap: dict[str, float | None]) -> float:
    """Arithmetic mean of the defined class APs; warns on undefined ones."""
    defined = {c: v for c, v in per_class_ap.items() if v is not None}
    undefined = sorted(set(per_class_ap) - set(defined))
    if not defined:
        raise NoDefinedClassesError("no class has a defined AP")
    if undefined:
        warnings.warn(f"classes with undefined AP excluded from mAP: {undefined}")
    return sum(defined.values()) / len(defined)


def filter_by_majority(labels: list[FramePairLabel],
                       threshold: float = MAJORITY_THRESHOLD,
                       ) -> tuple[list[DirectedLabel], int]:
    """Keep pairs whose majority vote share reaches the threshold.

    Exact vote ties are always excluded (no majority direction exists).
    Returns (kept labels with direction, excluded count).
    """
    kept: list[DirectedLabel] = []
    excluded = 0
    for label in labels:
        total = label.votes_increase + label.votes_decrease
        majority = max(label.votes_increase, label.votes_decrease)
        if label.votes_increase == label.votes_decrease or majority / total < threshold:
            excluded += 1
            continue
        direction = "increase" if label.votes_increase > label.votes_decrease else "decrease"
        kept.append(DirectedLabel(label.t1, label.t2, direction))
    return kept, excluded


def compare_directions(threat_by_frame: dict[int, float],
                       labels: list[DirectedLabel],
                       excluded_pairs: int = 0) -> EvalReport:
    """Score sign(T(t2) - T(t1)) against expert directions.

    A zero difference counts against the system whatever the label says,
    and is additionally tallied in zero_diff.
    """
    report = EvalReport(excluded_pairs=excluded_pairs)
    for label in labels:
        for t in (label.t1, label.t2):
            if t not in threat_by_frame:
                raise MissingFrameError(t)
        diff = threat_by_frame[label.t2] - threat_by_frame[label.t1]
        if diff == 0.0:
            report.zero_diff += 1
            predicted = None
        else:
            predicted = "increase" if diff > 0 else "decrease"

        if label.direction == "increase":
            if predicted == "increase":
                report.tp += 1
            else:
                report.fn += 1
        else:
            if predicted == "decrease":
                report.tn += 1
            else:
                report.fp += 1
    return report


def parse_ground_truth(path, config: StreamConfig) -> list[GroundTruthRecord]:
    """Ground-truth CSV: the detection columns plus a trailing `class`."""
    records: list[GroundTruthRecord] = []
    seen_content = False
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if not seen_content:
            seen_content = True
            if line.split(",")[0].strip() == "frame":
                continue
        fields = line.rsplit(",", 1)
        if len(fields) != 2 or not fields[1].strip():
            raise MalformedLineError(line_no, "missing class column")
        record = parse_detection_line(fields[0], line_no, config)
        records.append(GroundTruthRecord(record, fields[1].strip()))
    return records


def parse_labels(path) -> list[FramePairLabel]:
    """Frame-pair label CSV: `t1,t2,votes_increase,votes_decrease`."""
    labels: list[FramePairLabel] = []
    seen_content = False
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if not seen_content:
            seen_content = True
            if line.split(",")[0].strip() == "t1":
                continue
        fields = line.split(",")
        if len(fields) != 4:
            raise MalformedLineError(line_no, f"expected 4 fields, got {len(fields)}")
        try:
            t1, t2, inc, dec = (int(f) for f in fields)
        except ValueError:
            raise MalformedLineError(line_no, "non-integer field") from None
        try:
            labels.append(FramePairLabel(t1, t2, inc, dec))
        except ValueError as exc:
            raise MalformedLineError(line_no, str(exc)) from None
    return labels


def records_as_ap_input(records: list[DetectionRecord]) -> list[tuple[int, Box]]:
    return [(r.frame, Box(r.u, r.v, r.r, r.h, r.conf_a)) for r in records]


def predicted_mask_class(record: DetectionRecord) -> tuple[str, float]:
    """Predicted class and score for a face record: the higher of
    (c_mask, c_nomask) decides, ties go to masked."""
    if record.conf_b is None or record.conf_a >= record.conf_b:
        return "masked", record.conf_a
    return "unmasked", record.conf_b
