"""Run configuration: one key=value file covering the stream geometry
and every pipeline tunable, plus --set style overrides."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ConfigError
from .grouping import GroupingConfig
from .ingest import StreamConfig, parse_key_value_file
from .threat import ThreatParams

_FLOAT_KEYS = {
    "W", "H", "fps", "iou_gate", "alpha", "tau_seconds",
    "naive_threshold_fraction", "proximity_radius", "epsilon_m", "epsilon_g",
    "proximity_threshold", "beta", "ap_iou_threshold", "majority_threshold",
}
_INT_KEYS = {"max_gap", "naive_mode_max_people"}
_STR_KEYS = {"stream_id", "transform_mode", "unknown_mask_policy", "mask_aggregation"}
_SPECIAL_KEYS = {"cluster_count"}  # integer or "auto"
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | _SPECIAL_KEYS


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs besides the input files."""

    stream: StreamConfig
    grouping: GroupingConfig = GroupingConfig()
    threat: ThreatParams = ThreatParams()
    iou_gate: float = 0.3
    max_gap: int | None = None  # None = one second (round(fps))
    transform_mode: str = "projective"
    ap_iou_threshold: float = 0.5
    majority_threshold: float = 0.70

    def __post_init__(self):
        if self.transform_mode not in ("projective", "paper_linear"):
            raise ConfigError(f"unknown transform_mode {self.transform_mode!r}")
        if not (0.0 <= self.ap_iou_threshold <= 1.0):
            raise ConfigError("ap_iou_threshold must be in [0, 1]")
        if not (0.0 <= self.majority_threshold <= 1.0):
            raise ConfigError("majority_threshold must be in [0, 1]")

    @property
    def effective_max_gap(self) -> int:
        if self.max_gap is not None:
            return self.max_gap
        return int(round(self.stream.fps))


def _convert(key: str, raw: str):
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key == "cluster_count":
            return None if raw == "auto" else int(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw


def build_run_config(values: dict[str, str]) -> RunConfig:
    for key in values:
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    for required in ("W", "H", "fps"):
        if required not in values:
            raise ConfigError(f"missing required config key {required!r}")

    typed = {key: _convert(key, raw) for key, raw in values.items()}
    stream = StreamConfig(
        frame_width=typed["W"],
        frame_height=typed["H"],
        fps=typed["fps"],
        stream_id=typed.get("stream_id", "stream"),
    )
    grouping = GroupingConfig(
        alpha=typed.get("alpha", 0.25),
        tau_seconds=typed.get("tau_seconds", 10.0),
        naive_threshold_fraction=typed.get("naive_threshold_fraction", 0.20),
        naive_mode_max_people=typed.get("naive_mode_max_people", 6),
        proximity_radius=typed.get("proximity_radius", 1.0),
        cluster_count=typed.get("cluster_count"),
    )
    threat = ThreatParams(
        epsilon_m=typed.get("epsilon_m", 2.0),
        epsilon_g=typed.get("epsilon_g", 1.0),
        proximity_threshold=typed.get("proximity_threshold", 1.0),
        beta=typed.get("beta", 1.0),
        unknown_mask_policy=typed.get("unknown_mask_policy", "worst_case"),
        mask_aggregation=typed.get("mask_aggregation", "min"),
    )
    return RunConfig(
        stream=stream,
        grouping=grouping,
        threat=threat,
        iou_gate=typed.get("iou_gate", 0.3),
        max_gap=typed.get("max_gap"),
        transform_mode=typed.get("transform_mode", "projective"),
        ap_iou_threshold=typed.get("ap_iou_threshold", 0.5),
        majority_threshold=typed.get("majority_threshold", 0.70),
    )


def parse_run_config(path, overrides: list[str] | None = None) -> RunConfig:
    """Load a config file and apply `key=value` override strings."""
    values = parse_key_value_file(path)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, _, value = item.partition("=")
        values[key.strip()] = value.strip()
    return build_run_config(values)
