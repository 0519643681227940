"""Compile collective operations into point-to-point message schedules.

Each collective has two halves: a ``*_schedule`` function producing the
messages the simulator executes, and an ``eval_*`` function that moves real
payloads along the same tree so data correctness can be checked.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

from hiercoll.topology import LOCAL, RankTopology, edge_level
from hiercoll.trees import CommTree, multilevel_tree


@dataclass(frozen=True)
class Message:
    id: int
    sender: int
    receiver: int
    size: int
    level: int
    deps: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.sender == self.receiver:
            raise ValueError(f"message {self.id}: sender equals receiver ({self.sender})")
        if self.size < 0:
            raise ValueError(f"message {self.id}: negative size")

    def dump(self) -> str:
        deps = ",".join(map(str, sorted(self.deps))) or "-"
        return f"msg {self.id} {self.sender}->{self.receiver} size={self.size} level={self.level} deps={deps}"


@dataclass(frozen=True)
class Schedule:
    """Messages plus, for every sending rank, the order of its sends."""

    messages: tuple[Message, ...] = ()
    send_order: dict[int, tuple[int, ...]] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        for i, m in enumerate(self.messages):
            if m.id != i:
                raise ValueError(f"message ids must be 0..n-1 in order, got {m.id} at {i}")
            if any(d >= m.id or d < 0 for d in m.deps):
                raise ValueError(f"message {m.id} depends on a message defined after it")
        listed = sorted(i for ids in self.send_order.values() for i in ids)
        if listed != list(range(len(self.messages))):
            raise ValueError("send_order must list every message exactly once")
        for rank, ids in self.send_order.items():
            if any(self.messages[i].sender != rank for i in ids):
                raise ValueError(f"send_order of rank {rank} lists a message it does not send")

    def __len__(self):
        return len(self.messages)

    def dump(self) -> str:
        return "".join(m.dump() + "\n" for m in self.messages)

    @classmethod
    def build(cls, messages: Sequence[Message]) -> "Schedule":
        """Schedule whose per-rank send order follows message id order."""
        order: dict[int, list[int]] = {}
        for m in messages:
            order.setdefault(m.sender, []).append(m.id)
        return cls(tuple(messages), {r: tuple(ids) for r, ids in sorted(order.items())})

    def then(self, other: "Schedule", barrier: bool = True) -> "Schedule":
        """Concatenate two schedules.

        With ``barrier`` every send in ``other`` also waits for every message
        its sender received in ``self``.
        """
        offset = len(self.messages)
        received: dict[int, set[int]] = {}
        for m in self.messages:
            received.setdefault(m.receiver, set()).add(m.id)
        msgs = list(self.messages)
        for m in other.messages:
            deps = {d + offset for d in m.deps}
            if barrier:
                deps |= received.get(m.sender, set())
            msgs.append(Message(m.id + offset, m.sender, m.receiver, m.size, m.level, frozenset(deps)))
        order = {r: list(ids) for r, ids in self.send_order.items()}
        for r, ids in other.send_order.items():
            order.setdefault(r, []).extend(i + offset for i in ids)
        return Schedule(tuple(msgs), {r: tuple(ids) for r, ids in sorted(order.items())})


@dataclass(frozen=True)
class ReduceOp:
    name: str
    fn: Callable[[Any, Any], Any] = field(compare=False)
    commutative: bool = True

    def __call__(self, a, b):
        return self.fn(a, b)


SUM = ReduceOp("sum", operator.add)
MAX = ReduceOp("max", max)
MIN = ReduceOp("min", min)
# associative but not commutative; exposes combine order in tests
CONCAT = ReduceOp("concat", operator.add, commutative=False)
REDUCE_OPS = {op.name: op for op in (SUM, MAX, MIN, CONCAT)}


def _down(tree: CommTree, size_of: Callable[[int], int]) -> Schedule:
    msgs: list[Message] = []
    inbound: dict[int, int] = {}
    for u, v in tree.edges:
        deps = frozenset({inbound[u]}) if u in inbound else frozenset()
        m = Message(len(msgs), u, v, size_of(v), tree.edge_levels[u, v], deps)
        inbound[v] = m.id
        msgs.append(m)
    return Schedule.build(msgs)


def _up(tree: CommTree, size_of: Callable[[int], int]) -> Schedule:
    msgs: list[Message] = []
    outbound: dict[int, int] = {}
    # reverse pre-order puts every child before its parent
    for node in reversed(tree.preorder()):
        parent = tree.parent[node]
        if parent is None:
            continue
        deps = frozenset(outbound[c] for c in tree.children[node])
        outbound[node] = len(msgs)
        msgs.append(Message(len(msgs), node, parent, size_of(node), tree.edge_levels[parent, node], deps))
    return Schedule.build(msgs)


def bcast_schedule(tree: CommTree, size: int) -> Schedule:
    return _down(tree, lambda _child: size)


def reduce_schedule(tree: CommTree, size: int, op: Optional[ReduceOp] = None) -> Schedule:
    """Broadcast tree reversed: each node forwards once all children reported.

    ``op`` does not change the message pattern; it is accepted so callers can
    keep the schedule and its evaluation together.
    """
    return _up(tree, lambda _node: size)


def gather_schedule(tree: CommTree, item_size: int) -> Schedule:
    sizes = tree.subtree_sizes()
    return _up(tree, lambda node: sizes[node] * item_size)


def scatter_schedule(tree: CommTree, item_size: int) -> Schedule:
    sizes = tree.subtree_sizes()
    return _down(tree, lambda child: sizes[child] * item_size)


def fan_in_fan_out(tree: CommTree) -> Schedule:
    """Zero-byte reduce to the root followed by a zero-byte broadcast."""
    return reduce_schedule(tree, 0).then(bcast_schedule(tree, 0))


def barrier_schedule(rt: RankTopology, members: Optional[Iterable[int]] = None) -> Schedule:
    members = list(range(rt.num_ranks)) if members is None else list(members)
    if not members:
        raise ValueError("barrier needs at least one member")
    return fan_in_fan_out(multilevel_tree(rt, members, min(members)))


def ack_barrier_schedule(num_ranks: int, rt: Optional[RankTopology] = None) -> Schedule:
    """Every rank ACKs rank 0, which then sends GO to each rank in turn."""
    if num_ranks < 1:
        raise ValueError("num_ranks must be >= 1")

    def level(u, v):
        return edge_level(rt, u, v) if rt is not None else LOCAL

    acks = [Message(i, r, 0, 0, level(r, 0)) for i, r in enumerate(range(1, num_ranks))]
    ack_ids = frozenset(m.id for m in acks)
    gos = [Message(len(acks) + i, 0, r, 0, level(0, r), ack_ids)
           for i, r in enumerate(range(1, num_ranks))]
    return Schedule.build(acks + gos)


# functional evaluators


def eval_bcast(tree: CommTree, payload: Any) -> dict[int, Any]:
    """Deliver ``payload`` down the tree; returns what each rank holds."""
    held = {tree.root: payload}
    delivered: dict[int, int] = {}
    for u, v in tree.edges:
        if v in delivered:
            raise AssertionError(f"rank {v} received the broadcast twice")
        held[v] = held[u]
        delivered[v] = 1
    return held


def eval_reduce(tree: CommTree, values: Mapping[int, Any], op: ReduceOp) -> Any:
    """Tree reduction; each node folds its own value, then children by ascending rank."""
    partial: dict[int, Any] = {}
    for node in reversed(tree.preorder()):
        acc = values[node]
        for child in sorted(tree.children[node]):
            acc = op(acc, partial[child])
        partial[node] = acc
    return partial[tree.root]


def eval_gather(tree: CommTree, items: Mapping[int, bytes]) -> bytes:
    """Aggregate per-rank items up the tree; the root ends with them in rank order."""
    segments: dict[int, dict[int, bytes]] = {}
    for node in reversed(tree.preorder()):
        seg = {node: items[node]}
        for child in tree.children[node]:
            seg.update(segments.pop(child))
        segments[node] = seg
    gathered = segments[tree.root]
    return b"".join(gathered[r] for r in sorted(gathered))


def eval_scatter(tree: CommTree, buffer: bytes, item_size: int) -> dict[int, bytes]:
    """Split the root's rank-ordered ``buffer`` and forward subtree segments down."""
    if len(buffer) != item_size * len(tree.nodes):
        raise ValueError("buffer length must be item_size * number of members")
    slot = {r: i for i, r in enumerate(tree.nodes)}
    segment = {tree.root: {r: buffer[slot[r] * item_size:(slot[r] + 1) * item_size] for r in tree.nodes}}
    for u, v in tree.edges:
        part = {r: segment[u].pop(r) for r in tree.subtree(v)}
        segment[v] = part
    return {r: seg[r] for r, seg in segment.items()}
