"""threatgraph: temporal interaction graphs and COVID-19 transmission
threat scoring from calibrated fixed-camera detection streams."""

from .boxes import Box, containment_fraction, intersection_area, iou
from .config import RunConfig, build_run_config, parse_run_config
from .evaluation import (
    DirectedLabel,
    EvalReport,
    FramePairLabel,
    GroundTruthRecord,
    compare_directions,
    compute_ap,
    compute_map,
    filter_by_majority,
    parse_ground_truth,
    parse_labels,
)
from .geometry import (
    DistanceMatrix,
    FloorPoint,
    FloorTransform,
    distance_matrix,
    fit_floor_transform,
    project_to_floor,
    standing_location,
)
from .graph import (
    FrameGraph,
    TemporalGraph,
    VertexAttributes,
    build_frame_graph,
    deserialize_graph,
    serialize_graph,
)
from .grouping import (
    AffinityMatrix,
    ClusterAssignment,
    GroupState,
    GroupingConfig,
    SpectralGrouper,
    affinity_from_distance,
    group_indicator,
    spectral_cluster,
    update_groups,
)
from .heatmap import render_heatmap
from .ingest import (
    DetectionRecord,
    FrameBundle,
    StreamConfig,
    parse_calibration,
    parse_detection_stream,
    serialize_detection_stream,
)
from .pipeline import PipelineResult, RunManifest, run_pipeline, run_stream
from .synth import SyntheticScenario, generate_scenario, load_scenario
from .threat import (
    PairFeatures,
    ThreatParams,
    ThreatReport,
    frame_threat,
    pair_features,
    pair_threat,
    proximity_probability,
    threat_series,
)
from .tracking import (
    IouTracker,
    PairEvent,
    Track,
    TrackerState,
    associate_faces,
    associate_handshakes,
    interpolate_gaps,
)

__version__ = "0.1.0"
