"""Transit network vulnerability toolkit.

Builds a weighted station graph with in-station transfer arcs, derives
reasonable passenger paths, scores per-bin station importance from OD demand,
and simulates short-delay and station/interval/line failure scenarios.
"""

from .demand import (
    DemandProfile,
    IngestReport,
    ODMatrix,
    TimeBin,
    TripRecord,
    bin_trips,
    default_bins,
    generate_synthetic_demand,
    load_profile,
    load_trips,
)
from .network import (
    Edge,
    Station,
    StationGraph,
    TransferArc,
    load_network,
    new_graph,
    remove_line,
    remove_stations,
)
from .routing import (
    Path,
    PathCache,
    ReasonablePathSet,
    build_path_cache,
    k_shortest_paths,
    load_cache,
    reasonable_paths,
    save_cache,
    shortest_time_matrix,
)
from .curves import (
    ClusterAssignment,
    ImportanceSeries,
    cluster_curves,
    importance_series,
    kendall_tau,
    rank_frequency,
)
from .metrics import (
    StationMetrics,
    compute_bin_metrics,
    importance,
    line_importance,
    topo_metrics,
)
from .vulnerability import Disruption, DisruptionClass, classify, psi_long, psi_short

__version__ = "0.1.0"

__all__ = [
    "ClusterAssignment",
    "DemandProfile",
    "Disruption",
    "DisruptionClass",
    "Edge",
    "ImportanceSeries",
    "IngestReport",
    "ODMatrix",
    "Path",
    "PathCache",
    "ReasonablePathSet",
    "Station",
    "StationGraph",
    "StationMetrics",
    "TimeBin",
    "TransferArc",
    "TripRecord",
    "bin_trips",
    "build_path_cache",
    "classify",
    "cluster_curves",
    "compute_bin_metrics",
    "default_bins",
    "generate_synthetic_demand",
    "importance",
    "importance_series",
    "k_shortest_paths",
    "kendall_tau",
    "line_importance",
    "load_cache",
    "load_network",
    "load_profile",
    "load_trips",
    "new_graph",
    "psi_long",
    "psi_short",
    "rank_frequency",
    "reasonable_paths",
    "remove_line",
    "remove_stations",
    "save_cache",
    "shortest_time_matrix",
    "topo_metrics",
    "__version__",
]
