"""Detection stream, calibration, and config file parsing.

File formats are documented in docs/formats.md. The detection CSV is the
external contract that replaces a live detector front-end: one record per
line, columns `frame,kind,u,v,r,h,conf_a,conf_b,track_id`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import (
    BadKindError,
    ConfigError,
    DegenerateQuadError,
    MalformedLineError,
    OutOfBoundsError,
    WrongPointCountError,
)
from .validation import collinearity_margin

KINDS = ("person", "face", "handshake")
CSV_HEADER = "frame,kind,u,v,r,h,conf_a,conf_b,track_id"

COLLINEAR_TOL = 1e-9


@dataclass(frozen=True)
class StreamConfig:
    """Frame geometry and rate of the originating camera stream."""

    frame_width: float
    frame_height: float
    fps: float
    stream_id: str = "stream"

    def __post_init__(self):
        if self.frame_width <= 0 or self.frame_height <= 0:
            raise ConfigError("frame dimensions must be positive")
        if self.fps <= 0:
            raise ConfigError("fps must be positive")


@dataclass(frozen=True)
class DetectionRecord:
    """One bounding-box observation of a person, face, or handshake.

    (u, v) is the box center, r the aspect ratio (width / height), h the
    height, all in pixels. conf_a is the detector confidence; for faces
    (conf_a, conf_b) = (c_mask, c_nomask) and conf_b must be present,
    for other kinds conf_b must be absent.
    """

    frame: int
    kind: str
    u: float
    v: float
    r: float
    h: float
    conf_a: float
    conf_b: Optional[float] = None
    track_id: Optional[int] = None

    def validate(self, config: StreamConfig) -> str | None:
        """Return a reason string if an invariant fails, else None.

        Coordinate-bound failures are prefixed "bounds:" so the parser can
        distinguish OutOfBounds from MalformedLine.
        """
        if self.frame < 0:
            return "frame index must be >= 0"
        if self.kind not in KINDS:
            return f"unknown kind {self.kind!r}"
        if not (0 <= self.u < config.frame_width):
            return f"bounds: u={self.u} outside [0, {config.frame_width})"
        if not (0 <= self.v < config.frame_height):
            return f"bounds: v={self.v} outside [0, {config.frame_height})"
        if not self.r > 0:
            return "aspect ratio r must be > 0"
        if not self.h > 0:
            return "height h must be > 0"
        if not (0.0 <= self.conf_a <= 1.0):
            return "conf_a outside [0, 1]"
        if self.kind == "face":
            if self.conf_b is None:
                return "face records require conf_b (c_nomask)"
            if not (0.0 <= self.conf_b <= 1.0):
                return "conf_b outside [0, 1]"
        elif self.conf_b is not None:
            return f"conf_b only valid for face records, not {self.kind}"
        return None


@dataclass
class FrameBundle:
    """All detections of one frame, partitioned by kind."""

    frame: int
    persons: list[DetectionRecord] = field(default_factory=list)
    faces: list[DetectionRecord] = field(default_factory=list)
    handshakes: list[DetectionRecord] = field(default_factory=list)

    def records(self) -> Iterable[DetectionRecord]:
        yield from self.persons
        yield from self.faces
        yield from self.handshakes


def _parse_float(token: str, line_no: int, name: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise MalformedLineError(line_no, f"bad {name} value {token!r}") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise MalformedLineError(line_no, f"non-finite {name} value {token!r}")
    return value


def _parse_int(token: str, line_no: int, name: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise MalformedLineError(line_no, f"bad {name} value {token!r}") from None


def parse_detection_line(line: str, line_no: int, config: StreamConfig) -> DetectionRecord:
    fields = line.split(",")
    if len(fields) != 9:
        raise MalformedLineError(line_no, f"expected 9 fields, got {len(fields)}")
    frame = _parse_int(fields[0].strip(), line_no, "frame")
    kind = fields[1].strip()
    if kind not in KINDS:
        raise BadKindError(line_no, kind)
    u = _parse_float(fields[2], line_no, "u")
    v = _parse_float(fields[3], line_no, "v")
    r = _parse_float(fields[4], line_no, "r")
    h = _parse_float(fields[5], line_no, "h")
    conf_a = _parse_float(fields[6], line_no, "conf_a")
    conf_b_tok = fields[7].strip()
    conf_b = _parse_float(conf_b_tok, line_no, "conf_b") if conf_b_tok else None
    id_tok = fields[8].strip()
    track_id = _parse_int(id_tok, line_no, "track_id") if id_tok else None

    record = DetectionRecord(frame, kind, u, v, r, h, conf_a, conf_b, track_id)
    reason = record.validate(config)
    if reason is not None:
        if reason.startswith("bounds:"):
            raise OutOfBoundsError(line_no, reason[len("bounds:"):].strip())
        raise MalformedLineError(line_no, reason)
    return record


def parse_detection_stream(path, config: StreamConfig) -> list[FrameBundle]:
    """Parse a detection CSV into frame bundles sorted by frame index.

    Missing frame indices are legal (empty scene); downstream treats them
    as zero detections. Raises MalformedLineError / OutOfBoundsError /
    BadKindError with the offending 1-based line number.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_detection_text(text, config)


def parse_detection_text(text: str, config: StreamConfig) -> list[FrameBundle]:
    records = []
    seen_content = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if not seen_content:
            seen_content = True
            if line.split(",")[0].strip() == "frame":
                continue  # optional header
        records.append(parse_detection_line(line, line_no, config))
    return bundles_from_records(records)


def _format_record(rec: DetectionRecord) -> str:
    conf_b = repr(rec.conf_b) if rec.conf_b is not None else ""
    track_id = str(rec.track_id) if rec.track_id is not None else ""
    return (f"{rec.frame},{rec.kind},{rec.u!r},{rec.v!r},{rec.r!r},{rec.h!r},"
            f"{rec.conf_a!r},{conf_b},{track_id}")


def serialize_detection_text(bundles: Iterable[FrameBundle]) -> str:
    """Inverse of parse_detection_text; floats written with full precision."""
    lines = [CSV_HEADER]
    for bundle in bundles:
        for rec in bundle.records():
            lines.append(_format_record(rec))
    return "\n".join(lines) + "\n"


def serialize_detection_stream(bundles: Iterable[FrameBundle], path) -> None:
    Path(path).write_text(serialize_detection_text(bundles), encoding="utf-8")


def parse_calibration(path):
    """Read four image/floor correspondences.

    Returns (image_points, floor_points) as two lists of (x, y) tuples in
    corresponding order; floor units are meters.
    """
    text = Path(path).read_text(encoding="utf-8")
    rows = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise MalformedLineError(line_no, f"expected 4 fields, got {len(fields)}")
        rows.append(tuple(_parse_float(f, line_no, "coordinate") for f in fields))
    if len(rows) != 4:
        raise WrongPointCountError(f"calibration needs exactly 4 correspondences, got {len(rows)}")
    image_points = [(r[0], r[1]) for r in rows]
    floor_points = [(r[2], r[3]) for r in rows]
    for i in range(4):
        for j in range(i + 1, 4):
            for k in range(j + 1, 4):
                margin = collinearity_margin(image_points[i], image_points[j], image_points[k])
                if margin < COLLINEAR_TOL:
                    raise DegenerateQuadError(
                        f"image points {i}, {j}, {k} are collinear (margin {margin:.3e})")
    return image_points, floor_points


def parse_key_value_file(path) -> dict[str, str]:
    """key=value lines; blank lines and #-comments ignored."""
    values: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def bundles_from_records(records: Iterable[DetectionRecord]) -> list[FrameBundle]:
    """Group records into per-frame bundles sorted by frame index."""
    bundles: dict[int, FrameBundle] = {}
    for rec in records:
        bundle = bundles.setdefault(rec.frame, FrameBundle(frame=rec.frame))
        if rec.kind == "person":
            bundle.persons.append(rec)
        elif rec.kind == "face":
            bundle.faces.append(rec)
        else:
            bundle.handshakes.append(rec)
    return [bundles[t] for t in sorted(bundles)]
