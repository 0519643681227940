"""Shared fixtures data and random generators for the test suite."""

from __future__ import annotations

import random

from hiercoll.topology import LinkParams, SubjobSpec, TopologySpec, format_topology

FIG5 = """\
# SDSC SP plus two NCSA Origin 2000s on one LAN
link level=0 latency=0.05 bandwidth=1e6
link level=1 latency=0.001 bandwidth=1e7
link level=2 latency=1e-5 bandwidth=1e8
subjob count=10 machine=sdsc-sp
subjob count=5 machine=o2ka lan=NCSAlan
subjob count=5 machine=o2kb lan=NCSAlan
"""

LINKS3 = """\
link level=0 latency=0.05 bandwidth=1e6
link level=1 latency=0.001 bandwidth=1e7
link level=2 latency=1e-5 bandwidth=1e8
"""


def config(*subjobs: str, links: str = LINKS3) -> str:
    return links + "".join(f"subjob {s}\n" for s in subjobs)


def random_spec(rng: random.Random, max_ranks: int = 24, max_subjobs: int = 5) -> TopologySpec:
    """Random topology; a handful of LAN labels so groups get shared."""
    subjobs = []
    total = 0
    for i in range(rng.randint(1, max_subjobs)):
        room = max_ranks - total
        if room < 1:
            break
        count = rng.randint(1, min(6, room))
        lan = rng.choice([None, "a", "b", "c"])
        subjobs.append(SubjobSpec(i, count, f"m{i}", lan))
        total += count
    links = tuple(
        LinkParams(lvl, rng.choice([1e-5, 1e-3, 0.05]), rng.choice([1e6, 1e7, 1e8]), rng.choice([0.0, 0.0, 2e-6]))
        for lvl in range(3)
    )
    return TopologySpec(tuple(subjobs), links)


def random_config(rng: random.Random, **kw) -> str:
    return format_topology(random_spec(rng, **kw))


def random_members(rng: random.Random, n: int) -> tuple[list[int], int]:
    members = sorted(rng.sample(range(n), rng.randint(1, n)))
    return members, rng.choice(members)
