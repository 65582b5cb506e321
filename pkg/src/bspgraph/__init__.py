"""Single-process bulk-synchronous vertex-centric graph engine."""
from .algorithms import (
    PROGRAMS,
    PageRankConfig,
    bfs_program,
    label_propagation_program,
    max_value_program,
    pagerank_initial_value_insensitivity_check,
    pagerank_program,
    sssp_program,
    wcc_program,
)
from .engine import (
    Aggregator,
    BSPEngine,
    EngineConfig,
    RunResult,
    VertexProgram,
    run_program,
)
from .graph import Graph, assign_partitions, build_graph, out_edges, random_graph, symmetrize, validate
from .messages import MAX, MIN, SUM, Combiner

__version__ = "0.1.0"
