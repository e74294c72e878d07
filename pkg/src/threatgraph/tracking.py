"""Track association, gap interpolation, and face/handshake binding.

The tracker is a greedy IoU matcher: good enough downstream of the
detection contract because the interesting logic (grouping, threat) sits
on top of stable ids, not on appearance models. Streams that already
carry track ids are passed through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .boxes import Box, containment_fraction, intersection_area, iou
from .errors import (
    AtInfinityError,
    DuplicateTrackIdError,
    MixedIdModeError,
    NonMonotonicFrameError,
)
from .geometry import FloorTransform
from .ingest import DetectionRecord, FrameBundle

DEFAULT_IOU_GATE = 0.3


@dataclass
class Track:
    """A single identity's bounding boxes over time."""

    id: int
    kind: str = "person"
    boxes: dict[int, Box] = field(default_factory=dict)

    @property
    def first_frame(self) -> int:
        return min(self.boxes)

    @property
    def last_frame(self) -> int:
        return max(self.boxes)

    def add(self, frame: int, box: Box) -> None:
        self.boxes[frame] = box


@dataclass
class TrackerState:
    live_tracks: dict[int, Track] = field(default_factory=dict)
    retired_tracks: list[Track] = field(default_factory=list)
    next_id: int = 0
    last_frame_processed: int = -1


@dataclass(frozen=True)
class PairEvent:
    """A detected dyadic interaction between two tracked persons."""

    frame: int
    person_a: int
    person_b: int
    kind: str = "handshake"
    confidence: float = 1.0

    def __post_init__(self):
        if self.person_a == self.person_b:
            raise ValueError("pair event endpoints must differ")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError("confidence outside [0, 1]")

    def pair(self) -> tuple[int, int]:
        return (self.person_a, self.person_b)


def _record_box(rec: DetectionRecord) -> Box:
    return Box(rec.u, rec.v, rec.r, rec.h, rec.conf_a)


class IouTracker:
    """Assigns stable person ids across frames.

    Frames must be fed in increasing order. If the input records carry
    track ids the tracker runs in passthrough mode and preserves them
    exactly; otherwise unclaimed detections open new tracks and tracks
    unseen for more than max_gap frames are retired.
    """

    def __init__(self, iou_gate: float = DEFAULT_IOU_GATE, max_gap: int = 25):
        self.iou_gate = iou_gate
        self.max_gap = max_gap
        self.state = TrackerState()

    def associate(self, bundle: FrameBundle) -> dict[int, Box]:
        """Process one frame's person detections; returns id -> box."""
        state = self.state
        frame = bundle.frame
        if frame <= state.last_frame_processed:
            raise NonMonotonicFrameError(
                f"frame {frame} not after {state.last_frame_processed}")

        records = bundle.persons
        with_ids = [r for r in records if r.track_id is not None]
        if with_ids and len(with_ids) != len(records):
            raise MixedIdModeError(
                f"frame {frame}: {len(with_ids)} of {len(records)} records carry track ids")

        if with_ids:
            assigned = self._passthrough(frame, records)
        else:
            assigned = self._greedy(frame, records)
        state.last_frame_processed = frame
        return assigned

    def _passthrough(self, frame: int, records: list[DetectionRecord]) -> dict[int, Box]:
        state = self.state
        assigned: dict[int, Box] = {}
        for rec in records:
            if rec.track_id in assigned:
                raise DuplicateTrackIdError(
                    f"frame {frame}: track id {rec.track_id} appears twice")
            box = _record_box(rec)
            track = state.live_tracks.get(rec.track_id)
            if track is None:
                track = Track(id=rec.track_id)
                state.live_tracks[rec.track_id] = track
            track.add(frame, box)
            assigned[rec.track_id] = box
        if records:
            state.next_id = max(state.next_id, max(assigned) + 1)
        return assigned

    def _greedy(self, frame: int, records: list[DetectionRecord]) -> dict[int, Box]:
        state = self.state
        for tid in sorted(state.live_tracks):
            track = state.live_tracks[tid]
            if frame - track.last_frame > self.max_gap + 1:
                state.retired_tracks.append(state.live_tracks.pop(tid))

        boxes = [_record_box(r) for r in records]
        candidates = []
        for tid, track in state.live_tracks.items():
            last_box = track.boxes[track.last_frame]
            for det_idx, box in enumerate(boxes):
                overlap = iou(last_box, box)
                if overlap >= self.iou_gate:
                    candidates.append((overlap, tid, det_idx))
        # Descending IoU, ties to the lower track id, then to the smaller
        # box tuple so the result is independent of detection order.
        candidates.sort(key=lambda c: (-c[0], c[1], boxes[c[2]]))

        assigned: dict[int, Box] = {}
        matched_dets: set[int] = set()
        for overlap, tid, det_idx in candidates:
            if tid in assigned or det_idx in matched_dets:
                continue
            state.live_tracks[tid].add(frame, boxes[det_idx])
            assigned[tid] = boxes[det_idx]
            matched_dets.add(det_idx)

        unmatched = [i for i in range(len(boxes)) if i not in matched_dets]
        unmatched.sort(key=lambda i: boxes[i])
        for det_idx in unmatched:
            track = Track(id=state.next_id)
            state.next_id += 1
            track.add(frame, boxes[det_idx])
            state.live_tracks[track.id] = track
            assigned[track.id] = boxes[det_idx]
        return assigned

    def all_tracks(self) -> list[Track]:
        """Every track seen so far, live and retired, by ascending id."""
        tracks = list(self.state.live_tracks.values()) + self.state.retired_tracks
        return sorted(tracks, key=lambda t: t.id)


def interpolate_gaps(track: Track, max_gap: int) -> Track:
    """Fill internal gaps of <= max_gap missing frames by linear
    interpolation of (u, v, r, h); interpolated confidence is the smaller
    endpoint confidence. Observed boxes are never altered."""
    frames = sorted(track.boxes)
    if len(frames) < 2:
        return Track(track.id, track.kind, dict(track.boxes))

    filled = dict(track.boxes)
    for t0, t1 in zip(frames, frames[1:]):
        gap = t1 - t0 - 1
        if gap < 1 or gap > max_gap:
            continue
        b0, b1 = track.boxes[t0], track.boxes[t1]
        conf = min(b0.conf, b1.conf)
        for t in range(t0 + 1, t1):
            lam = (t - t0) / (t1 - t0)
            filled[t] = Box(
                b0.u + lam * (b1.u - b0.u),
                b0.v + lam * (b1.v - b0.v),
                b0.r + lam * (b1.r - b0.r),
                b0.h + lam * (b1.h - b0.h),
                conf,
            )
    return Track(track.id, track.kind, filled)


def associate_faces(person_boxes: dict[int, Box],
                    face_records: list[DetectionRecord],
                    ) -> tuple[dict[int, tuple[float, float] | None], int]:
    """Bind face boxes to person boxes for one frame.

    A face is eligible for a person when at least half of the face box
    lies inside the person box and the face center falls in the person
    box's upper half; among eligible persons the one covering the largest
    fraction of the face wins. Persons without a face map to None
    (unknown mask state). Returns (mask_map, dropped_face_count).
    """
    best_per_person: dict[int, tuple[float, Box, tuple]] = {}
    dropped = 0
    for rec in face_records:
        face = _record_box(rec)
        best: tuple[float, int] | None = None
        for pid in sorted(person_boxes):
            pbox = person_boxes[pid]
            frac = containment_fraction(face, pbox)
            if frac < 0.5:
                continue
            px1, py1, px2, _ = pbox.corners()
            in_upper_half = (px1 <= face.u <= px2) and (py1 <= face.v <= pbox.v)
            if not in_upper_half:
                continue
            if best is None or frac > best[0]:
                best = (frac, pid)
        if best is None:
            dropped += 1
            continue
        frac, pid = best
        key = (rec.conf_a, rec.conf_b)
        current = best_per_person.get(pid)
        if current is None or frac > current[0]:
            if current is not None:
                dropped += 1
            best_per_person[pid] = (frac, face, key)
        else:
            dropped += 1

    mask_map: dict[int, tuple[float, float] | None] = {}
    for pid in sorted(person_boxes):
        entry = best_per_person.get(pid)
        mask_map[pid] = None if entry is None else (entry[2][0], entry[2][1])
    return mask_map, dropped


def associate_handshakes(person_boxes: dict[int, Box],
                         handshake_records: list[DetectionRecord],
                         frame: int,
                         floor_locations: dict[int, tuple[float, float]],
                         calib: FloorTransform | None = None,
                         ) -> tuple[list[PairEvent], int]:
    """Bind handshake boxes to the two most plausible person tracks.

    Image-space overlap decides first; when fewer than two persons
    overlap the box, the two persons whose floor locations are nearest to
    the box's projected ground point are used. Frames with fewer than two
    tracked persons drop the event. Returns (events, dropped_count).
    """
    events: list[PairEvent] = []
    dropped = 0
    for rec in handshake_records:
        if len(person_boxes) < 2:
            dropped += 1
            continue
        hbox = _record_box(rec)
        overlaps = []
        for pid in sorted(person_boxes):
            area = intersection_area(hbox, person_boxes[pid])
            if area > 0.0:
                overlaps.append((-area, pid))
        if len(overlaps) >= 2:
            overlaps.sort()
            chosen = [overlaps[0][1], overlaps[1][1]]
        else:
            ranked = _nearest_by_floor(hbox, floor_locations, calib)
            if ranked is None:
                dropped += 1
                continue
            chosen = ranked[:2]
        a, b = sorted(chosen)
        events.append(PairEvent(frame, a, b, "handshake", rec.conf_a))
    return events, dropped


def _nearest_by_floor(hbox: Box, floor_locations: dict[int, tuple[float, float]],
                      calib: FloorTransform | None) -> list[int] | None:
    if calib is None or len(floor_locations) < 2:
        return None
    try:
        hx, hy = calib.transform([hbox.bottom_center()])[0]
    except AtInfinityError:
        return None
    ranked = sorted(
        floor_locations,
        key=lambda pid: ((floor_locations[pid][0] - hx) ** 2
                         + (floor_locations[pid][1] - hy) ** 2, pid),
    )
    return ranked
