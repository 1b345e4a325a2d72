"""Resource-constrained partitioning of dataflow DAGs.

The package splits into five layers: the graph model (`graph`), synthetic
graph families (`generators`), antichain algorithms (`antichain`), the
edge-zeroing partitioner (`partition`), the execution simulator
(`simulate`), and a command-line front end (`cli`).
"""

from .antichain import (
    Antichain,
    FlowNetwork,
    brute_force_max_weighted_antichain,
    is_antichain,
    max_antichain_length,
    max_weighted_antichain,
)
from .generators import FAMILIES, GeneratorSpec, generate_pipeline
from .graph import (
    PGT,
    DataflowEdge,
    Drop,
    ReachabilityMatrix,
    ResourceVector,
    ValidationError,
    completion_time,
    dump_pgt,
    load_pgt,
    reachability,
)
from .partition import (
    ClusterAssignment,
    InfeasibleDropError,
    Partition,
    PartitionSolution,
    dop_satisfied,
    dump_solution,
    load_solution,
    merge_to_m_clusters,
    partition,
    singleton_solution,
    try_merge_partition,
)
from .simulate import (
    SimulationTrace,
    concurrent_sets,
    simulate,
    trace_summary,
    write_trace_csv,
)

__all__ = [
    "Antichain",
    "ClusterAssignment",
    "DataflowEdge",
    "Drop",
    "FAMILIES",
    "FlowNetwork",
    "GeneratorSpec",
    "InfeasibleDropError",
    "PGT",
    "Partition",
    "PartitionSolution",
    "ReachabilityMatrix",
    "ResourceVector",
    "SimulationTrace",
    "ValidationError",
    "brute_force_max_weighted_antichain",
    "completion_time",
    "concurrent_sets",
    "dop_satisfied",
    "dump_pgt",
    "dump_solution",
    "generate_pipeline",
    "is_antichain",
    "load_pgt",
    "load_solution",
    "max_antichain_length",
    "max_weighted_antichain",
    "merge_to_m_clusters",
    "partition",
    "reachability",
    "simulate",
    "singleton_solution",
    "trace_summary",
    "try_merge_partition",
    "write_trace_csv",
]

__version__ = "0.1.0"
