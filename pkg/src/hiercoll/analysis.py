"""Closed-form broadcast cost estimates and simulated algorithm comparisons."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from hiercoll.collectives import ack_barrier_schedule, barrier_schedule, bcast_schedule
from hiercoll.simnet import simulate
from hiercoll.topology import LinkParams, TopologySpec, topology_vectors
from hiercoll.trees import ALGORITHMS, build_tree


@dataclass(frozen=True)
class CostParams:
    """``P`` processes spread evenly over ``C`` clusters, message of ``N`` bytes.

    ``l_s``/``b_s`` are the inter-cluster latency and bandwidth, ``l_f``/``b_f``
    the intra-cluster ones.
    """

    P: int
    C: int
    N: float
    l_s: float
    b_s: float
    l_f: float
    b_f: float

    def __post_init__(self):
        if not (self.P >= self.C >= 1):
            raise ValueError(f"need P >= C >= 1, got P={self.P}, C={self.C}")
        if self.b_s <= 0 or self.b_f <= 0:
            raise ValueError("bandwidths must be positive")
        if self.l_s < 0 or self.l_f < 0 or self.N < 0:
            raise ValueError("latencies and message size must be non-negative")


def _log2_exact(x: int, name: str) -> int:
    if x < 1 or x & (x - 1):
        raise ValueError(f"{name}={x} is not a power of two")
    return x.bit_length() - 1


def _terms(p: CostParams) -> tuple[int, int, float, float]:
    log_c = _log2_exact(p.C, "C")
    log_p = _log2_exact(p.P, "P")
    slow = p.l_s + p.N / p.b_s
    fast = p.l_f + p.N / p.b_f
    return log_c, log_p - log_c, slow, fast


def binomial_cost_estimate(p: CostParams) -> float:
    """log2(C)(l_s + N/b_s) + log2(P/C)(l_f + N/b_f)."""
    log_c, log_pc, slow, fast = _terms(p)
    return log_c * slow + log_pc * fast


def multilevel_cost_estimate(p: CostParams) -> float:
    """One slow hop (none for a single cluster) plus log2(P/C) fast hops."""
    log_c, log_pc, slow, fast = _terms(p)
    return (1 if p.C >= 2 else 0) * slow + log_pc * fast


@dataclass(frozen=True)
class BenchRow:
    message_size: int
    algorithm: str
    root: Union[int, str]
    total_time: float
    makespan_max: float
    wan_msgs: int
    lan_msgs: int
    local_msgs: int

    HEADER = "message_size,algorithm,root,total_time,makespan_max,wan_msgs,lan_msgs,local_msgs"

    def csv(self) -> str:
        return (f"{self.message_size},{self.algorithm},{self.root},{self.total_time!r},"
                f"{self.makespan_max!r},{self.wan_msgs},{self.lan_msgs},{self.local_msgs}")


def _check_algorithms(algorithms: Iterable[str]) -> list[str]:
    algorithms = list(algorithms)
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {alg!r}; expected one of {', '.join(ALGORITHMS)}")
    return algorithms


def compare(topology: TopologySpec, algorithms: Sequence[str], sizes: Sequence[int],
            roots: Union[str, Iterable[int]] = "all",
            links: Optional[Sequence[LinkParams]] = None, **sim_kw) -> list[BenchRow]:
    """Simulate one broadcast per root for every (algorithm, size) cell.

    Each row sums makespans and message counts over the requested roots.
    """
    algorithms = _check_algorithms(algorithms)
    rt = topology_vectors(topology)
    links = links or topology.links
    root_list = list(range(rt.num_ranks)) if roots == "all" else list(roots)
    label = "all" if roots == "all" or len(root_list) != 1 else root_list[0]

    rows = []
    for alg in algorithms:
        trees = [build_tree(alg, rt, r) for r in root_list]
        for size in sizes:
            total = worst = 0.0
            counts = [0, 0, 0]
            for tree in trees:
                rep = simulate(bcast_schedule(tree, size), rt, links, **sim_kw)
                total += rep.makespan
                worst = max(worst, rep.makespan)
                counts = [a + b for a, b in zip(counts, rep.level_counts)]
            rows.append(BenchRow(size, alg, label, total, worst, *counts))
    return rows


def rotating_root_bench(topology: TopologySpec, algorithm: str, sizes: Sequence[int],
                        links: Optional[Sequence[LinkParams]] = None, **sim_kw) -> list[BenchRow]:
    """Simulated rotating-root broadcast timing loop.

    Per size: one multilevel barrier, then for every rank in turn a broadcast
    rooted there followed by an ACK/GO barrier to rank 0.  Phase makespans
    are summed; ``makespan_max`` is the slowest single broadcast.
    """
    _check_algorithms([algorithm])
    rt = topology_vectors(topology)
    links = links or topology.links
    n = rt.num_ranks

    lead = simulate(barrier_schedule(rt), rt, links, **sim_kw)
    ack = simulate(ack_barrier_schedule(n, rt), rt, links, **sim_kw)
    trees = [build_tree(algorithm, rt, r) for r in range(n)]

    rows = []
    for size in sizes:
        total = lead.makespan
        worst = 0.0
        counts = [a + n * b for a, b in zip(lead.level_counts, ack.level_counts)]
        for tree in trees:
            rep = simulate(bcast_schedule(tree, size), rt, links, **sim_kw)
            total += rep.makespan + ack.makespan
            worst = max(worst, rep.makespan)
            counts = [a + b for a, b in zip(counts, rep.level_counts)]
        rows.append(BenchRow(size, algorithm, "all", total, worst, *counts))
    return rows
