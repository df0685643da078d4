"""Temporal blockmodeling of online community interaction networks.

Activity logs become directed comment and reaction networks per period,
which are blockmodeled into core / semi-periphery / periphery positions;
partitions are compared across periods and each actor's path through the
positions is classified.
"""
__version__ = "0.1.0"

from .netmodel import (  # noqa: E402
    OneModeNetwork,
    Partition,
    TwoModeNetwork,
    read_pajek_net,
    read_partition_clu,
    write_pajek_net,
    write_partition_clu,
)
from .ingest import (  # noqa: E402
    ActivityLog,
    ActivityRecord,
    PeriodSpec,
    RecordKind,
    activity_stats,
    build_two_mode,
    default_periods,
    parse_activity_log,
    slice_periods,
)
from .transform import comment_network, log_normalize, multiply_two_mode, reaction_network, reduce_network  # noqa: E402
from .blockmodel import (  # noqa: E402
    BlockModel,
    agglomerative_cluster,
    classify_structure,
    fit_blockmodel,
    image_matrix,
    label_positions,
    structural_dissimilarity,
)
from .stability import contingency, modified_rand, stability_series  # noqa: E402
from .trajectory import State, TrajectoryRecord, build_trajectories, classify_trajectory, flow_counts  # noqa: E402
from .synth import SynthConfig, generate_planted, generate_temporal  # noqa: E402

__all__ = [
    "__version__",
    "OneModeNetwork", "Partition", "TwoModeNetwork",
    "read_pajek_net", "read_partition_clu", "write_pajek_net", "write_partition_clu",
    "ActivityLog", "ActivityRecord", "PeriodSpec", "RecordKind",
    "activity_stats", "build_two_mode", "default_periods", "parse_activity_log", "slice_periods",
    "comment_network", "log_normalize", "multiply_two_mode", "reaction_network", "reduce_network",
    "BlockModel", "agglomerative_cluster", "classify_structure", "fit_blockmodel",
    "image_matrix", "label_positions", "structural_dissimilarity",
    "contingency", "modified_rand", "stability_series",
    "State", "TrajectoryRecord", "build_trajectories", "classify_trajectory", "flow_counts",
    "SynthConfig", "generate_planted", "generate_temporal",
]
