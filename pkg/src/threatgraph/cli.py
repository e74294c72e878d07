"""Command-line interface: run, eval, synth, render subcommands.

Exit codes: 0 success, 1 input error, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .boxes import Box
from .config import parse_run_config
from .errors import EmptyGroundTruthError, ThreatGraphError
from .evaluation import (
    compare_directions,
    compute_ap,
    compute_map,
    filter_by_majority,
    parse_ground_truth,
    parse_labels,
    predicted_mask_class,
    records_as_ap_input,
)
from .heatmap import render_heatmap
from .ingest import parse_detection_stream
from .pipeline import RunManifest, read_threat_csv, run_pipeline
from .synth import generate_scenario, load_scenario


def _cmd_run(args) -> int:
    manifest = RunManifest(
        detections=Path(args.detections),
        calibration=Path(args.calibration),
        config=Path(args.config),
        out_dir=Path(args.out),
        overrides=args.set or [],
    )
    result = run_pipeline(manifest)
    print(f"processed {result.counters['frames_processed']} frames, "
          f"{result.counters['tracks_total']} tracks, "
          f"{len(result.confirmed_groups)} confirmed groups")
    print(f"artifacts written to {manifest.out_dir}")
    return 0


def _ap_or_none(dets, gts, iou_threshold):
    if not gts:
        return None
    try:
        return compute_ap(dets, gts, iou_threshold)
    except EmptyGroundTruthError:
        return None


def _fmt_metric(value) -> str:
    return "undefined" if value is None else repr(float(value))


def _cmd_eval(args) -> int:
    config = parse_run_config(Path(args.config), args.set or [])
    lines: list[str] = []

    if args.ground_truth:
        if not args.detections:
            raise ThreatGraphError("--ground-truth evaluation needs --detections")
        bundles = parse_detection_stream(Path(args.detections), config.stream)
        det_records = [r for b in bundles for r in b.records()]
        gt_records = parse_ground_truth(Path(args.ground_truth), config.stream)
        iou_thr = config.ap_iou_threshold

        person_dets = records_as_ap_input([r for r in det_records if r.kind == "person"])
        person_gts = records_as_ap_input(
            [g.record for g in gt_records if g.record.kind == "person"])
        lines.append(f"person_ap={_fmt_metric(_ap_or_none(person_dets, person_gts, iou_thr))}")

        face_dets_all = [r for r in det_records if r.kind == "face"]
        face_gts_all = [g for g in gt_records if g.record.kind == "face"]
        face_dets = records_as_ap_input(face_dets_all)
        face_gts = records_as_ap_input([g.record for g in face_gts_all])
        lines.append(
            f"face_localization_ap={_fmt_metric(_ap_or_none(face_dets, face_gts, iou_thr))}")

        per_class = {}
        for cls in ("masked", "unmasked"):
            cls_dets = []
            for rec in face_dets_all:
                predicted, score = predicted_mask_class(rec)
                if predicted == cls:
                    cls_dets.append((rec.frame, Box(rec.u, rec.v, rec.r, rec.h, score)))
            cls_gts = records_as_ap_input(
                [g.record for g in face_gts_all if g.class_label == cls])
            per_class[cls] = _ap_or_none(cls_dets, cls_gts, iou_thr)
            lines.append(f"{cls}_ap={_fmt_metric(per_class[cls])}")
        if any(v is not None for v in per_class.values()):
            lines.append(f"mask_map={_fmt_metric(compute_map(per_class))}")
        else:
            lines.append("mask_map=undefined")

    if args.labels:
        if not args.threat_csv:
            raise ThreatGraphError("--labels evaluation needs --threat-csv "
                                   "(produce one with the run subcommand)")
        threat_by_frame = read_threat_csv(Path(args.threat_csv))
        labels = parse_labels(Path(args.labels))
        kept, excluded = filter_by_majority(labels, config.majority_threshold)
        report = compare_directions(threat_by_frame, kept, excluded_pairs=excluded)
        lines.extend([
            f"label_pairs={len(labels)}",
            f"excluded_pairs={report.excluded_pairs}",
            f"tp={report.tp}", f"fp={report.fp}",
            f"tn={report.tn}", f"fn={report.fn}",
            f"zero_diff_pairs={report.zero_diff}",
            f"accuracy={_fmt_metric(report.accuracy)}",
            f"precision={_fmt_metric(report.precision)}",
            f"recall={_fmt_metric(report.recall)}",
        ])

    if not lines:
        raise ThreatGraphError("nothing to evaluate: pass --ground-truth and/or --labels")

    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "eval_report.txt").write_text(text, encoding="utf-8")
    return 0


def _cmd_synth(args) -> int:
    scenario = load_scenario(Path(args.scenario))
    paths = generate_scenario(scenario, Path(args.out))
    for name in sorted(paths):
        print(f"{name}: {paths[name]}")
    return 0


def _cmd_render(args) -> int:
    rows = []
    for raw in Path(args.matrix).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        rows.append([float(tok) for tok in line.split(",")])
    try:
        lo, hi = (float(tok) for tok in args.range.split(","))
    except ValueError:
        raise ThreatGraphError(f"--range must be lo,hi, got {args.range!r}") from None
    render_heatmap(rows, (lo, hi), Path(args.out))
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threatgraph",
        description="Temporal interaction graphs and transmission threat "
                    "scoring from detection streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline")
    run.add_argument("--detections", required=True)
    run.add_argument("--calibration", required=True)
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override a config key")
    run.set_defaults(func=_cmd_run)

    ev = sub.add_parser("eval", help="evaluate detections and/or threat direction")
    ev.add_argument("--config", required=True)
    ev.add_argument("--detections")
    ev.add_argument("--ground-truth")
    ev.add_argument("--labels")
    ev.add_argument("--threat-csv")
    ev.add_argument("--out")
    ev.add_argument("--set", action="append", metavar="KEY=VALUE")
    ev.set_defaults(func=_cmd_eval)

    synth = sub.add_parser("synth", help="generate a synthetic scene")
    synth.add_argument("--scenario", required=True)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=_cmd_synth)

    render = sub.add_parser("render", help="render a matrix CSV as a P2 graymap")
    render.add_argument("--matrix", required=True)
    render.add_argument("--range", required=True, metavar="LO,HI")
    render.add_argument("--out", required=True)
    render.set_defaults(func=_cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ThreatGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - internal invariant violation
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
