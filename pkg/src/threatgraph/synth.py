"""Synthetic scene generator: scripted floor-plane trajectories projected
back into image space as a detection stream plus ground-truth files.

Scenarios are JSON (see docs/formats.md): per-person waypoint scripts in
floor meters, scripted mask states, and scripted handshake intervals.
The emitted detection CSV round-trips through the pipeline so the
scripted geometry is recovered exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, OutsideCalibratedRegionError
from .geometry import FloorTransform, fit_floor_transform
from .ingest import (
    DetectionRecord,
    FrameBundle,
    StreamConfig,
    bundles_from_records,
    serialize_detection_stream,
)


@dataclass(frozen=True)
class PersonScript:
    """One scripted person: id, floor waypoints (frame, x, y), and a
    constant mask state ("masked", "unmasked", or "none")."""

    person_id: int
    waypoints: tuple[tuple[int, float, float], ...]
    mask: str = "none"
    mask_confidence: float = 0.9

    def __post_init__(self):
        if len(self.waypoints) < 1:
            raise ConfigError("person script needs at least one waypoint")
        frames = [w[0] for w in self.waypoints]
        if frames != sorted(frames):
            raise ConfigError("waypoints must be in frame order")
        if self.mask not in ("masked", "unmasked", "none"):
            raise ConfigError(f"unknown mask state {self.mask!r}")

    @property
    def first_frame(self) -> int:
        return self.waypoints[0][0]

    @property
    def last_frame(self) -> int:
        return self.waypoints[-1][0]

    def position(self, frame: int) -> tuple[float, float] | None:
        if frame < self.first_frame or frame > self.last_frame:
            return None
        for (f0, x0, y0), (f1, x1, y1) in zip(self.waypoints, self.waypoints[1:]):
            if f0 <= frame <= f1:
                if f1 == f0:
                    return (x1, y1)
                lam = (frame - f0) / (f1 - f0)
                return (x0 + lam * (x1 - x0), y0 + lam * (y1 - y0))
        return (self.waypoints[-1][1], self.waypoints[-1][2])


@dataclass(frozen=True)
class HandshakeScript:
    person_a: int
    person_b: int
    start_frame: int
    end_frame: int
    confidence: float = 0.95


@dataclass
class SyntheticScenario:
    stream: StreamConfig
    image_points: list[tuple[float, float]]
    floor_points: list[tuple[float, float]]
    duration_seconds: float
    persons: list[PersonScript] = field(default_factory=list)
    handshakes: list[HandshakeScript] = field(default_factory=list)
    groups: list[tuple[int, int]] = field(default_factory=list)
    person_height_px: float = 80.0
    person_aspect: float = 0.4
    emit_track_ids: bool = True

    @property
    def n_frames(self) -> int:
        return int(round(self.duration_seconds * self.stream.fps))


def _convex_polygon(points: np.ndarray) -> np.ndarray:
    centroid = points.mean(axis=0)
    angles = np.arctan2(points[:, 1] - centroid[1], points[:, 0] - centroid[0])
    return points[np.argsort(angles)]


def _inside_polygon(point, polygon: np.ndarray, tol: float = 1e-9) -> bool:
    x, y = point
    sign = 0
    n = len(polygon)
    for i in range(n):
        x0, y0 = polygon[i]
        x1, y1 = polygon[(i + 1) % n]
        cross = (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0)
        if abs(cross) <= tol:
            continue
        s = 1 if cross > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return True


def scenario_from_dict(data: dict) -> SyntheticScenario:
    try:
        stream = StreamConfig(
            frame_width=float(data["frame_width"]),
            frame_height=float(data["frame_height"]),
            fps=float(data["fps"]),
            stream_id=str(data.get("stream_id", "synthetic")),
        )
        calib = data["calibration"]
        persons = [
            PersonScript(
                person_id=int(p["id"]),
                waypoints=tuple((int(w[0]), float(w[1]), float(w[2]))
                                for w in p["waypoints"]),
                mask=p.get("mask", "none"),
                mask_confidence=float(p.get("mask_confidence", 0.9)),
            )
            for p in data.get("persons", [])
        ]
        handshakes = [
            HandshakeScript(
                person_a=int(h["a"]), person_b=int(h["b"]),
                start_frame=int(h["start_frame"]), end_frame=int(h["end_frame"]),
                confidence=float(h.get("confidence", 0.95)),
            )
            for h in data.get("handshakes", [])
        ]
        return SyntheticScenario(
            stream=stream,
            image_points=[tuple(map(float, p)) for p in calib["image_points"]],
            floor_points=[tuple(map(float, p)) for p in calib["floor_points"]],
            duration_seconds=float(data["duration_seconds"]),
            persons=persons,
            handshakes=handshakes,
            groups=[tuple(sorted((int(a), int(b)))) for a, b in data.get("groups", [])],
            person_height_px=float(data.get("person_height_px", 80.0)),
            person_aspect=float(data.get("person_aspect", 0.4)),
            emit_track_ids=bool(data.get("emit_track_ids", True)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario: {exc}") from None


def load_scenario(path) -> SyntheticScenario:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario is not valid JSON: {exc}") from None
    return scenario_from_dict(data)


def _validate_scenario(scenario: SyntheticScenario, polygon: np.ndarray) -> None:
    ids = [p.person_id for p in scenario.persons]
    if len(ids) != len(set(ids)):
        raise ConfigError("person ids must be unique")
    for person in scenario.persons:
        for f, x, y in person.waypoints:
            if not (0 <= f < scenario.n_frames):
                raise ConfigError(
                    f"waypoint frame {f} outside scenario duration")
            if not _inside_polygon((x, y), polygon):
                raise OutsideCalibratedRegionError(
                    f"person {person.person_id} waypoint ({x}, {y}) outside the "
                    f"calibrated floor region")
    for hs in scenario.handshakes:
        if hs.person_a not in ids or hs.person_b not in ids:
            raise ConfigError("handshake references unknown person id")
        if not (0 <= hs.start_frame <= hs.end_frame < scenario.n_frames):
            raise ConfigError("handshake interval outside scenario duration")


def _person_record(scenario, calib, frame, person) -> DetectionRecord | None:
    pos = person.position(frame)
    if pos is None:
        return None
    su, sv = calib.inverse_transform([pos])[0]
    h = scenario.person_height_px
    u, v = float(su), float(sv) - 0.5 * h
    _check_in_frame(scenario.stream, u, v, f"person {person.person_id} at frame {frame}")
    return DetectionRecord(
        frame=frame, kind="person", u=u, v=v, r=scenario.person_aspect, h=h,
        conf_a=1.0, track_id=person.person_id if scenario.emit_track_ids else None,
    )


def _check_in_frame(stream: StreamConfig, u: float, v: float, what: str) -> None:
    if not (0 <= u < stream.frame_width and 0 <= v < stream.frame_height):
        raise OutsideCalibratedRegionError(
            f"{what} projects outside the frame at ({u:.1f}, {v:.1f})")


def generate_records(scenario: SyntheticScenario) -> list[DetectionRecord]:
    """All scripted detection records, frame by frame."""
    polygon = _convex_polygon(np.asarray(scenario.floor_points, dtype=float))
    _validate_scenario(scenario, polygon)
    calib = fit_floor_transform(scenario.image_points, scenario.floor_points)

    records: list[DetectionRecord] = []
    persons_by_id = {p.person_id: p for p in scenario.persons}
    for frame in range(scenario.n_frames):
        boxes: dict[int, DetectionRecord] = {}
        for person in scenario.persons:
            rec = _person_record(scenario, calib, frame, person)
            if rec is None:
                continue
            boxes[person.person_id] = rec
            records.append(rec)
            if person.mask != "none":
                c = person.mask_confidence
                c_mask, c_nomask = (c, 1.0 - c) if person.mask == "masked" else (1.0 - c, c)
                face_h = 0.15 * rec.h
                records.append(DetectionRecord(
                    frame=frame, kind="face", u=rec.u, v=rec.v - 0.25 * rec.h,
                    r=1.0, h=face_h, conf_a=c_mask, conf_b=c_nomask,
                ))
        for hs in scenario.handshakes:
            if not (hs.start_frame <= frame <= hs.end_frame):
                continue
            if hs.person_a not in boxes or hs.person_b not in boxes:
                raise ConfigError(
                    f"handshake at frame {frame} references a person not in scene")
            ra, rb = boxes[hs.person_a], boxes[hs.person_b]
            u = 0.5 * (ra.u + rb.u)
            v = 0.5 * (ra.v + rb.v)
            _check_in_frame(scenario.stream, u, v, "handshake box")
            records.append(DetectionRecord(
                frame=frame, kind="handshake", u=u, v=v, r=1.5,
                h=0.25 * scenario.person_height_px, conf_a=hs.confidence,
            ))
    if not persons_by_id and scenario.handshakes:
        raise ConfigError("handshakes scripted without persons")
    return records


def generate_bundles(scenario: SyntheticScenario) -> list[FrameBundle]:
    return bundles_from_records(generate_records(scenario))


def generate_scenario(scenario: SyntheticScenario, out_dir) -> dict[str, Path]:
    """Write the detection stream, calibration, config, and ground-truth
    files for a scenario. Returns the emitted paths by artifact name."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = generate_records(scenario)
    bundles = bundles_from_records(records)

    paths = {
        "detections": out / "detections.csv",
        "calibration": out / "calibration.csv",
        "config": out / "config.txt",
        "groups_gt": out / "groundtruth_groups.csv",
        "handshakes_gt": out / "groundtruth_handshakes.csv",
        "detections_gt": out / "groundtruth_detections.csv",
    }
    serialize_detection_stream(bundles, paths["detections"])

    calib_lines = [f"{ix!r},{iy!r},{fx!r},{fy!r}"
                   for (ix, iy), (fx, fy) in zip(scenario.image_points, scenario.floor_points)]
    paths["calibration"].write_text("\n".join(calib_lines) + "\n", encoding="utf-8")

    stream = scenario.stream
    paths["config"].write_text(
        f"W={stream.frame_width!r}\nH={stream.frame_height!r}\n"
        f"fps={stream.fps!r}\nstream_id={stream.stream_id}\n",
        encoding="utf-8")

    group_lines = [f"{a},{b}" for a, b in sorted(scenario.groups)]
    paths["groups_gt"].write_text(
        "\n".join(group_lines) + ("\n" if group_lines else ""), encoding="utf-8")

    hs_lines = [f"{h.person_a},{h.person_b},{h.start_frame},{h.end_frame}"
                for h in scenario.handshakes]
    paths["handshakes_gt"].write_text(
        "\n".join(hs_lines) + ("\n" if hs_lines else ""), encoding="utf-8")

    gt_lines = []
    for rec in records:
        if rec.kind == "person":
            label = "person"
        elif rec.kind == "handshake":
            label = "handshake"
        else:
            label = "masked" if rec.conf_a >= (rec.conf_b or 0.0) else "unmasked"
        conf_b = repr(rec.conf_b) if rec.conf_b is not None else ""
        track = str(rec.track_id) if rec.track_id is not None else ""
        gt_lines.append(f"{rec.frame},{rec.kind},{rec.u!r},{rec.v!r},{rec.r!r},"
                        f"{rec.h!r},{rec.conf_a!r},{conf_b},{track},{label}")
    paths["detections_gt"].write_text(
        "\n".join(gt_lines) + ("\n" if gt_lines else ""), encoding="utf-8")
    return paths
