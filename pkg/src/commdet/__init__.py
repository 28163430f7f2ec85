"""Community detection via the Louvain method, with a benchmark CLI.

Core pieces: CSR graphs (:mod:`commdet.graph`), modularity scoring and
move bookkeeping (:mod:`commdet.community`), the sequential engine with
async/sync local moving and threshold scaling (:mod:`commdet.louvain`),
a threaded local-moving engine (:mod:`commdet.parallel`), and synthetic
fixtures (:mod:`commdet.fixtures`).  ``commdet.cli`` wires them into the
``commdet`` command.
"""

from .community import (
    Aggregates,
    Dendrogram,
    community_aggregates,
    delta_modularity,
    flatten,
    modularity,
    modularity_bruteforce,
    normalize_labels,
    singleton_assignment,
)
from .graph import (
    EdgeList,
    Graph,
    GraphParseError,
    GraphStats,
    build_graph,
    graph_stats,
    load_graph_file,
    parse_edgelist,
    parse_matrix_market,
)
from .louvain import Config, Report, aggregate_graph, local_moving, louvain, sweep_tolerance
from .parallel import ParallelConfig, parallel_local_moving, parallel_louvain, sweep_threads

__version__ = "0.1.0"

__all__ = [
    "Aggregates",
    "Config",
    "Dendrogram",
    "EdgeList",
    "Graph",
    "GraphParseError",
    "GraphStats",
    "ParallelConfig",
    "Report",
    "aggregate_graph",
    "build_graph",
    "community_aggregates",
    "delta_modularity",
    "flatten",
    "graph_stats",
    "load_graph_file",
    "local_moving",
    "louvain",
    "modularity",
    "modularity_bruteforce",
    "normalize_labels",
    "parallel_local_moving",
    "parallel_louvain",
    "parse_edgelist",
    "parse_matrix_market",
    "singleton_assignment",
    "sweep_threads",
    "sweep_tolerance",
]
