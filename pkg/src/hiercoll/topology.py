"""Topology configuration parsing and per-rank topology vectors.

A configuration document is line oriented::

    # three machines, two of them sharing a LAN
    link level=0 latency=0.05 bandwidth=1e6
    link level=1 latency=0.001 bandwidth=1e7
    link level=2 latency=1e-5 bandwidth=1e8 overhead=0
    subjob count=10 machine=sdsc-sp
    subjob count=5 machine=o2ka lan=NCSAlan
    subjob count=5 machine=o2kb lan=NCSAlan

Ranks are handed out contiguously in subjob order.  Each subjob is its own
machine group; subjobs naming the same ``lan`` share a LAN group and a
subjob without one gets a LAN group to itself.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

WAN = 0
LAN = 1
LOCAL = 2
NUM_LEVELS = 3
LEVEL_NAMES = ("wan", "lan", "local")


class TopologyError(ValueError):
    """Raised for malformed or invalid topology configurations."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class LinkParams:
    level: int
    latency: float
    bandwidth: float
    overhead: float = 0.0

    def __post_init__(self):
        if self.level not in range(NUM_LEVELS):
            raise TopologyError(f"link level must be 0, 1 or 2, got {self.level}")
        if not math.isfinite(self.latency) or self.latency < 0:
            raise TopologyError(f"latency must be >= 0, got {self.latency}")
        if not math.isfinite(self.bandwidth) or self.bandwidth <= 0:
            raise TopologyError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not math.isfinite(self.overhead) or self.overhead < 0:
            raise TopologyError(f"overhead must be >= 0, got {self.overhead}")

    def transfer_time(self, size: float) -> float:
        """Latency plus serialization time for a message of ``size`` bytes."""
        return self.latency + size / self.bandwidth


@dataclass(frozen=True)
class SubjobSpec:
    index: int
    count: int
    machine_id: str
    lan_id: Optional[str] = None

    def __post_init__(self):
        if self.count < 1:
            raise TopologyError("count must be ≥ 1")


@dataclass(frozen=True)
class TopologySpec:
    subjobs: tuple[SubjobSpec, ...]
    links: tuple[LinkParams, ...]

    def __post_init__(self):
        if not self.subjobs:
            raise TopologyError("at least one subjob is required")
        for i, sj in enumerate(self.subjobs):
            if sj.index != i:
                raise TopologyError(f"subjob indices must be consecutive from 0, got {sj.index} at position {i}")
        if tuple(link.level for link in self.links) != tuple(range(NUM_LEVELS)):
            raise TopologyError("exactly one link per level 0, 1, 2 is required")

    @property
    def total_ranks(self) -> int:
        return sum(sj.count for sj in self.subjobs)


@dataclass(frozen=True)
class RankTopology:
    """Per-rank ``(lan_group, machine_group)`` vectors plus group membership.

    ``lan_groups[g]`` lists the machine groups inside LAN group ``g`` and
    ``machine_groups[m]`` lists the ranks on machine group ``m``.
    """

    vectors: tuple[tuple[int, int], ...]
    lan_groups: tuple[tuple[int, ...], ...]
    machine_groups: tuple[tuple[int, ...], ...]

    @property
    def num_ranks(self) -> int:
        return len(self.vectors)

    def lan_of(self, rank: int) -> int:
        return self.vectors[rank][0]

    def machine_of(self, rank: int) -> int:
        return self.vectors[rank][1]

    def lan_members(self, group: int) -> tuple[int, ...]:
        return tuple(r for m in self.lan_groups[group] for r in self.machine_groups[m])


_LINK_KEYS = {"level", "latency", "bandwidth", "overhead"}
_SUBJOB_KEYS = {"count", "machine", "lan"}


def _pairs(tokens: Sequence[str], allowed: set[str], lineno: int) -> dict[str, str]:
    out: dict[str, str] = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep or not key or not value:
            raise TopologyError(f"expected key=value, got {tok!r}", lineno)
        if key not in allowed:
            raise TopologyError(f"unknown key {key!r}", lineno)
        if key in out:
            raise TopologyError(f"repeated key {key!r}", lineno)
        out[key] = value
    return out


def _number(kv: dict[str, str], key: str, kind, lineno: int, default=None):
    if key not in kv:
        if default is None:
            raise TopologyError(f"missing key {key!r}", lineno)
        return default
    try:
        return kind(kv[key])
    except ValueError:
        raise TopologyError(f"bad value for {key}: {kv[key]!r}", lineno) from None


def parse_topology(text: str) -> TopologySpec:
    """Parse a configuration document into a :class:`TopologySpec`."""
    links: dict[int, LinkParams] = {}
    subjobs: list[SubjobSpec] = []
    machines: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, *tokens = line.split()
        if directive == "link":
            kv = _pairs(tokens, _LINK_KEYS, lineno)
            level = _number(kv, "level", int, lineno)
            if level in links:
                raise TopologyError(f"duplicate link level {level}", lineno)
            try:
                links[level] = LinkParams(
                    level=level,
                    latency=_number(kv, "latency", float, lineno),
                    bandwidth=_number(kv, "bandwidth", float, lineno),
                    overhead=_number(kv, "overhead", float, lineno, default=0.0),
                )
            except TopologyError as exc:
                if exc.line is not None:
                    raise
                raise TopologyError(str(exc), lineno) from None
        elif directive == "subjob":
            kv = _pairs(tokens, _SUBJOB_KEYS, lineno)
            count = _number(kv, "count", int, lineno)
            if count < 1:
                raise TopologyError("count must be ≥ 1", lineno)
            if "machine" not in kv:
                raise TopologyError("missing key 'machine'", lineno)
            machine = kv["machine"]
            if machine in machines:
                warnings.warn(
                    f"line {lineno}: machine {machine!r} already used by subjob "
                    f"{machines[machine]}; treating it as a separate machine group",
                    stacklevel=2,
                )
            else:
                machines[machine] = len(subjobs)
            subjobs.append(SubjobSpec(len(subjobs), count, machine, kv.get("lan")))
        else:
            raise TopologyError(f"unknown directive {directive!r}", lineno)

    missing = [lvl for lvl in range(NUM_LEVELS) if lvl not in links]
    if missing:
        raise TopologyError(f"missing link level(s) {', '.join(map(str, missing))}")
    if not subjobs:
        raise TopologyError("at least one subjob is required")
    return TopologySpec(tuple(subjobs), tuple(links[lvl] for lvl in range(NUM_LEVELS)))


def load_topology(path) -> TopologySpec:
    return parse_topology(Path(path).read_text(encoding="utf-8"))


def format_topology(spec: TopologySpec) -> str:
    """Canonical text form; ``parse_topology(format_topology(s)) == s``."""
    lines = [
        f"link level={lk.level} latency={lk.latency!r} bandwidth={lk.bandwidth!r} overhead={lk.overhead!r}"
        for lk in spec.links
    ]
    for sj in spec.subjobs:
        line = f"subjob count={sj.count} machine={sj.machine_id}"
        if sj.lan_id is not None:
            line += f" lan={sj.lan_id}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def topology_vectors(spec: TopologySpec) -> RankTopology:
    """Assign ranks and derive the per-rank topology vectors."""
    lan_index: dict[str, int] = {}
    lan_groups: list[list[int]] = []
    machine_groups: list[tuple[int, ...]] = []
    vectors: list[tuple[int, int]] = []

    next_rank = 0
    for sj in spec.subjobs:
        if sj.lan_id is not None and sj.lan_id in lan_index:
            lan = lan_index[sj.lan_id]
        else:
            lan = len(lan_groups)
            lan_groups.append([])
            if sj.lan_id is not None:
                lan_index[sj.lan_id] = lan
        lan_groups[lan].append(sj.index)
        machine_groups.append(tuple(range(next_rank, next_rank + sj.count)))
        vectors.extend([(lan, sj.index)] * sj.count)
        next_rank += sj.count

    return RankTopology(
        vectors=tuple(vectors),
        lan_groups=tuple(tuple(g) for g in lan_groups),
        machine_groups=tuple(machine_groups),
    )


def edge_level(rt: RankTopology, u: int, v: int) -> int:
    """Network level crossed by a message between ranks ``u`` and ``v``."""
    if u == v:
        raise ValueError(f"edge_level needs two distinct ranks, got {u} twice")
    n = rt.num_ranks
    if not (0 <= u < n and 0 <= v < n):
        raise ValueError(f"rank out of range 0..{n - 1}: ({u}, {v})")
    vu, vv = rt.vectors[u], rt.vectors[v]
    for i, (a, b) in enumerate(zip(vu, vv)):
        if a != b:
            return i
    return LOCAL
