"""Temporal interaction graph: per-frame vertices, interaction edges,
and newline-delimited serialization.

File schema (`threatgraph-v1`, see docs/formats.md): one header line
carrying the schema token plus stream metadata JSON, then one JSON object
per frame. Floats are written with full repr precision so a round trip
is bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import SchemaMismatchError
from .geometry import FloorPoint
from .grouping import ClusterAssignment
from .tracking import PairEvent

SCHEMA_TOKEN = "threatgraph-v1"


@dataclass(frozen=True)
class VertexAttributes:
    """One person's per-frame state: floor location, mask confidence
    tuple (None = unknown), and per-frame cluster label."""

    person_id: int
    location: FloorPoint
    mask: Optional[tuple[float, float]] = None
    group_label: Optional[int] = None


@dataclass
class FrameGraph:
    """Vertices and interaction edges of a single frame.

    Edges are keyed by unordered id pair (i < j); absent pairs carry no
    entry. The stored value is (present, confidence)."""

    frame: int
    vertices: list[VertexAttributes] = field(default_factory=list)
    edges: dict[tuple[int, int], tuple[int, float]] = field(default_factory=dict)

    def vertex_ids(self) -> list[int]:
        return sorted(v.person_id for v in self.vertices)

    def vertex(self, person_id: int) -> VertexAttributes:
        for v in self.vertices:
            if v.person_id == person_id:
                return v
        raise KeyError(person_id)


@dataclass
class TemporalGraph:
    """The full stream graph: one FrameGraph per processed frame plus the
    stream-level set of confirmed social-group pairs."""

    stream_id: str = "stream"
    fps: float = 25.0
    frames: dict[int, FrameGraph] = field(default_factory=dict)
    confirmed_groups: set[tuple[int, int]] = field(default_factory=set)

    def add_frame(self, fg: FrameGraph) -> None:
        if self.frames and fg.frame <= max(self.frames):
            raise ValueError(f"frame {fg.frame} not after {max(self.frames)}")
        self.frames[fg.frame] = fg

    def ordered_frames(self) -> list[FrameGraph]:
        return [self.frames[t] for t in sorted(self.frames)]


def build_frame_graph(frame: int,
                      floor_points: list[FloorPoint],
                      mask_map: dict[int, tuple[float, float] | None],
                      pair_events: Iterable[PairEvent],
                      assignment: ClusterAssignment | None = None,
                      ) -> tuple[FrameGraph, int]:
    """Assemble one frame's graph.

    One vertex per tracked person present in floor_points; one edge per
    pair event, keeping the highest confidence on duplicates. Events that
    reference an untracked person are dropped and counted (the dangling
    edge count is the second return value).
    """
    labels = assignment.labels if assignment is not None else {}
    vertices = []
    for fp in sorted(floor_points, key=lambda p: p.person_id):
        vertices.append(VertexAttributes(
            person_id=fp.person_id,
            location=fp,
            mask=mask_map.get(fp.person_id),
            group_label=labels.get(fp.person_id),
        ))
    known = {v.person_id for v in vertices}

    edges: dict[tuple[int, int], tuple[int, float]] = {}
    dangling = 0
    for event in pair_events:
        a, b = sorted(event.pair())
        if a not in known or b not in known:
            dangling += 1
            continue
        current = edges.get((a, b))
        if current is None or event.confidence > current[1]:
            edges[(a, b)] = (1, event.confidence)
    return FrameGraph(frame=frame, vertices=vertices, edges=edges), dangling


def _vertex_to_obj(v: VertexAttributes) -> dict:
    return {
        "id": v.person_id,
        "x": v.location.x,
        "y": v.location.y,
        "mask": list(v.mask) if v.mask is not None else None,
        "group": v.group_label,
    }


def _frame_to_line(fg: FrameGraph) -> str:
    obj = {
        "frame": fg.frame,
        "vertices": [_vertex_to_obj(v) for v in
                     sorted(fg.vertices, key=lambda v: v.person_id)],
        "edges": [[i, j, present, conf]
                  for (i, j), (present, conf) in sorted(fg.edges.items())],
    }
    return json.dumps(obj, separators=(",", ":"))


def graph_to_lines(g: TemporalGraph) -> list[str]:
    meta = {
        "stream_id": g.stream_id,
        "fps": g.fps,
        "confirmed_groups": [list(p) for p in sorted(g.confirmed_groups)],
    }
    lines = [f"{SCHEMA_TOKEN} {json.dumps(meta, separators=(',', ':'))}"]
    lines.extend(_frame_to_line(fg) for fg in g.ordered_frames())
    return lines


def serialize_graph(g: TemporalGraph, path) -> None:
    Path(path).write_text("\n".join(graph_to_lines(g)) + "\n", encoding="utf-8")


def graph_from_lines(lines: list[str]) -> TemporalGraph:
    content = [ln for ln in (ln.strip() for ln in lines) if ln]
    if not content:
        raise SchemaMismatchError("empty graph file")
    token, _, meta_json = content[0].partition(" ")
    if token != SCHEMA_TOKEN:
        raise SchemaMismatchError(f"expected header {SCHEMA_TOKEN!r}, got {token!r}")
    try:
        meta = json.loads(meta_json) if meta_json else {}
    except json.JSONDecodeError as exc:
        raise SchemaMismatchError(f"bad header metadata: {exc}") from None

    g = TemporalGraph(
        stream_id=meta.get("stream_id", "stream"),
        fps=meta.get("fps", 25.0),
        confirmed_groups={tuple(p) for p in meta.get("confirmed_groups", [])},
    )
    for line in content[1:]:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaMismatchError(f"bad frame record: {exc}") from None
        frame = obj["frame"]
        vertices = [
            VertexAttributes(
                person_id=v["id"],
                location=FloorPoint(v["x"], v["y"], v["id"], frame),
                mask=tuple(v["mask"]) if v["mask"] is not None else None,
                group_label=v["group"],
            )
            for v in obj["vertices"]
        ]
        edges = {(e[0], e[1]): (e[2], e[3]) for e in obj["edges"]}
        g.add_frame(FrameGraph(frame=frame, vertices=vertices, edges=edges))
    return g


def deserialize_graph(path) -> TemporalGraph:
    return graph_from_lines(Path(path).read_text(encoding="utf-8").splitlines())
