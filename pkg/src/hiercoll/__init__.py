"""Topology-aware collective communication trees and a small network simulator."""

from hiercoll.topology import (
    LAN,
    LOCAL,
    WAN,
    LinkParams,
    RankTopology,
    SubjobSpec,
    TopologyError,
    TopologySpec,
    edge_level,
    format_topology,
    load_topology,
    parse_topology,
    topology_vectors,
)
from hiercoll.trees import (
    ALGORITHMS,
    CommTree,
    TreePolicy,
    binomial_tree,
    build_tree,
    flat_tree,
    multilevel_tree,
    representative,
    two_level_tree,
)
from hiercoll.collectives import (
    MAX,
    MIN,
    SUM,
    CONCAT,
    Message,
    ReduceOp,
    Schedule,
    ack_barrier_schedule,
    barrier_schedule,
    bcast_schedule,
    gather_schedule,
    reduce_schedule,
    scatter_schedule,
)
from hiercoll.simnet import SimReport, count_by_level, simulate

__version__ = "0.1.0"
from hiercoll.analysis import (
    BenchRow,
    CostParams,
    binomial_cost_estimate,
    compare,
    multilevel_cost_estimate,
    rotating_root_bench,
)
