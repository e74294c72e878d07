"""Full pipeline orchestration: detections in, threat artifacts out.

Stage order: parse, track (with gap interpolation), project to the floor
plane, cluster and confirm groups, assemble the temporal graph, then
score threat per frame. Group confirmation is stream-final: the threat
series applies the complete confirmed set to every frame, matching the
offline character of recorded-footage analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_run_config
from .errors import MalformedLineError, ThreatGraphError
from .geometry import (
    FloorPoint,
    FloorTransform,
    distance_matrix,
    fit_floor_transform,
    standing_location,
)
from .graph import TemporalGraph, build_frame_graph, serialize_graph
from .grouping import GroupState, affinity_from_distance, spectral_cluster, update_groups
from .heatmap import render_heatmap
from .ingest import FrameBundle, parse_calibration, parse_detection_stream
from .threat import ThreatReport, threat_series
from .tracking import IouTracker, associate_faces, associate_handshakes, interpolate_gaps

THREAT_CSV_HEADER = "frame,total_threat,n_people,n_edges"


@dataclass
class RunManifest:
    """Input paths and settings for one pipeline run."""

    detections: Path
    calibration: Path
    config: Path
    out_dir: Path
    overrides: list[str] = field(default_factory=list)

    def validate(self) -> None:
        for name in ("detections", "calibration", "config"):
            path = Path(getattr(self, name))
            if not path.is_file():
                raise ThreatGraphError(f"{name} file not found: {path}")


@dataclass
class PipelineResult:
    graph: TemporalGraph
    reports: list[ThreatReport]
    counters: dict[str, int]
    confirmed_groups: set[tuple[int, int]]


def run_stream(bundles: list[FrameBundle], config: RunConfig,
               calib: FloorTransform) -> PipelineResult:
    """Run the in-memory pipeline over parsed bundles.

    Every integer frame between the first and last present in the input
    is processed; absent bundles count as empty scenes.
    """
    graph = TemporalGraph(stream_id=config.stream.stream_id, fps=config.stream.fps)
    counters = {
        "frames_processed": 0,
        "tracks_total": 0,
        "unassigned_faces": 0,
        "dropped_handshake_events": 0,
        "dangling_edges": 0,
    }
    if not bundles:
        return PipelineResult(graph, [], counters, set())

    by_frame = {b.frame: b for b in bundles}
    first, last = min(by_frame), max(by_frame)
    max_gap = config.effective_max_gap

    tracker = IouTracker(iou_gate=config.iou_gate, max_gap=max_gap)
    for frame in range(first, last + 1):
        tracker.associate(by_frame.get(frame, FrameBundle(frame=frame)))

    tracks = [interpolate_gaps(t, max_gap) for t in tracker.all_tracks()]
    counters["tracks_total"] = len(tracks)

    state = GroupState()
    for frame in range(first, last + 1):
        bundle = by_frame.get(frame, FrameBundle(frame=frame))
        person_boxes = {t.id: t.boxes[frame] for t in tracks if frame in t.boxes}

        floor_points: list[FloorPoint] = []
        floor_xy: dict[int, tuple[float, float]] = {}
        for pid in sorted(person_boxes):
            x, y = calib.transform([standing_location(person_boxes[pid])])[0]
            floor_points.append(FloorPoint(float(x), float(y), pid, frame))
            floor_xy[pid] = (float(x), float(y))

        mask_map, face_drops = associate_faces(person_boxes, bundle.faces)
        counters["unassigned_faces"] += face_drops

        m_d = distance_matrix(floor_points)
        assignment = None
        if floor_points:
            affinity = affinity_from_distance(m_d, config.grouping.alpha)
            assignment = spectral_cluster(affinity, config.grouping.cluster_count, frame)
            update_groups(state, assignment, m_d, config.grouping, config.stream.fps)

        events, hs_drops = associate_handshakes(
            person_boxes, bundle.handshakes, frame, floor_xy, calib)
        counters["dropped_handshake_events"] += hs_drops

        frame_graph, dangling = build_frame_graph(
            frame, floor_points, mask_map, events, assignment)
        counters["dangling_edges"] += dangling
        graph.add_frame(frame_graph)
        counters["frames_processed"] += 1

    graph.confirmed_groups = set(state.confirmed)
    reports = threat_series(graph, config.threat)
    return PipelineResult(graph, reports, counters, set(state.confirmed))


def _fmt(value: float) -> str:
    return repr(float(value))


def write_threat_csv(reports: list[ThreatReport], path) -> None:
    lines = [THREAT_CSV_HEADER]
    for rep in reports:
        n_edges = int(np.triu(rep.interaction, 1).sum()) if rep.interaction.size else 0
        lines.append(f"{rep.frame},{_fmt(rep.total)},{len(rep.ids)},{n_edges}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_threat_csv(path) -> dict[int, float]:
    """frame -> total_threat from a written threat CSV."""
    totals: dict[int, float] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("frame"):
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise MalformedLineError(line_no, "expected 4 columns in threat CSV")
        totals[int(fields[0])] = float(fields[1])
    return totals


def write_matrix_blocks(reports: list[ThreatReport], attr: str, path) -> None:
    """Per-frame CSV blocks of one activity matrix type."""
    blocks = []
    for rep in reports:
        matrix = getattr(rep, attr)
        lines = [f"frame,{rep.frame}",
                 "ids" + ("," if rep.ids else "") + ",".join(str(i) for i in rep.ids)]
        for row in matrix:
            lines.append(",".join(_fmt(v) for v in row))
        blocks.append("\n".join(lines))
    Path(path).write_text("\n\n".join(blocks) + "\n" if blocks else "", encoding="utf-8")


def _write_heatmaps(reports: list[ThreatReport], out_dir: Path) -> list[Path]:
    target = None
    for rep in reversed(reports):
        if len(rep.ids) >= 1:
            target = rep
            break
    if target is None:
        return []
    written = []
    dmax = float(target.distance.max()) if target.distance.size else 0.0
    tmax = float(target.threat.max()) if target.threat.size else 0.0
    ranges = {
        # Reversed range: closer (smaller distance) renders brighter.
        "distance": (dmax if dmax > 0 else 1.0, 0.0),
        "group": (0.0, 1.0),
        "interaction": (0.0, 1.0),
        "threat": (0.0, tmax if tmax > 0 else 1.0),
    }
    for name, value_range in ranges.items():
        path = out_dir / f"heatmap_{name}.pgm"
        render_heatmap(getattr(target, name), value_range, path)
        written.append(path)
    return written


def write_summary(result: PipelineResult, path) -> None:
    lines = [f"{key}={result.counters[key]}" for key in sorted(result.counters)]
    groups = ";".join(f"{a}-{b}" for a, b in sorted(result.confirmed_groups))
    lines.append(f"confirmed_groups={groups}")
    lines.append(f"confirmed_group_count={len(result.confirmed_groups)}")
    total = sum(rep.total for rep in result.reports)
    lines.append(f"total_threat_sum={_fmt(total) if result.reports else '0.0'}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_pipeline(manifest: RunManifest) -> PipelineResult:
    """Execute a full run and write all artifacts into the out directory."""
    manifest.validate()
    config = parse_run_config(manifest.config, manifest.overrides)
    image_points, floor_points = parse_calibration(manifest.calibration)
    calib = fit_floor_transform(image_points, floor_points, mode=config.transform_mode)
    bundles = parse_detection_stream(manifest.detections, config.stream)

    result = run_stream(bundles, config, calib)

    out = Path(manifest.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_threat_csv(result.reports, out / "threat.csv")
    serialize_graph(result.graph, out / "temporal_graph.txt")
    for attr in ("distance", "group", "interaction", "threat"):
        write_matrix_blocks(result.reports, attr, out / f"matrices_{attr}.csv")
    _write_heatmaps(result.reports, out)
    write_summary(result, out / "run_summary.txt")
    return result
