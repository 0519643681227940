"""Spanning-tree construction over a set of ranks.

Every builder is a pure function of its arguments, so each process can
compute the same tree locally once it knows the root.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from hiercoll.topology import LAN, LOCAL, WAN, RankTopology, edge_level

FLAT = "flat"
BINOMIAL = "binomial"
SHAPES = (FLAT, BINOMIAL)

ALGORITHMS = ("binomial", "2level-machine", "2level-lan", "multilevel")


@dataclass(frozen=True)
class CommTree:
    """Rooted spanning tree; ``children[n]`` is also ``n``'s send order."""

    root: int
    nodes: tuple[int, ...]
    children: dict[int, tuple[int, ...]] = field(hash=False)
    parent: dict[int, Optional[int]] = field(hash=False)
    edge_levels: dict[tuple[int, int], int] = field(hash=False)

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Edges in pre-order, each parent's children in send order."""
        out = []
        for node in self.preorder():
            out.extend((node, c) for c in self.children[node])
        return out

    def preorder(self) -> list[int]:
        order, stack = [], [self.root]
        while stack:
            node = stack.pop()
            order.append(node)
            stack.extend(reversed(self.children[node]))
        return order

    def subtree(self, node: int) -> list[int]:
        out, stack = [], [node]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(self.children[n])
        return sorted(out)

    def subtree_sizes(self) -> dict[int, int]:
        sizes: dict[int, int] = {}
        for node in reversed(self.preorder()):
            sizes[node] = 1 + sum(sizes[c] for c in self.children[node])
        return sizes

    def level_counts(self) -> tuple[int, int, int]:
        counts = [0, 0, 0]
        for lvl in self.edge_levels.values():
            counts[lvl] += 1
        return tuple(counts)

    def to_dot(self, name: str = "tree") -> str:
        lines = [f"digraph {name} {{"]
        lines += [f'  r{n} [label="r{n}"];' for n in self.nodes]
        lines += [f"  r{u} -> r{v} [level={self.edge_levels[u, v]}];" for u, v in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TreePolicy:
    """Tree shape used at each network level of a multilevel tree."""

    wan: str = FLAT
    lan: str = BINOMIAL
    local: str = BINOMIAL

    def __post_init__(self):
        for shape in (self.wan, self.lan, self.local):
            if shape not in SHAPES:
                raise ValueError(f"unknown tree shape {shape!r}; expected one of {SHAPES}")

    def shape(self, level: int) -> str:
        return (self.wan, self.lan, self.local)[level]


def _check_members(members: Iterable[int], root: int) -> list[int]:
    members = list(members)
    ordered = sorted(set(members))
    if len(ordered) != len(members):
        raise ValueError("duplicate members")
    if root not in ordered:
        raise ValueError(f"root {root} is not a member")
    return ordered


def _finish(root: int, nodes: Sequence[int], children: dict[int, list[int]],
            rt: Optional[RankTopology]) -> CommTree:
    parent: dict[int, Optional[int]] = {n: None for n in nodes}
    levels: dict[tuple[int, int], int] = {}
    for u, kids in children.items():
        for v in kids:
            parent[v] = u
            levels[u, v] = edge_level(rt, u, v) if rt is not None else LOCAL
    return CommTree(
        root=root,
        nodes=tuple(sorted(nodes)),
        children={n: tuple(children.get(n, ())) for n in sorted(nodes)},
        parent=parent,
        edge_levels=levels,
    )


def _binomial_children(members: list[int], root: int) -> dict[int, list[int]]:
    n = len(members)
    base = members.index(root)
    children: dict[int, list[int]] = {m: [] for m in members}
    for r in range(n):
        # children sit below r's lowest set bit; the root spans the whole range
        limit = r & -r if r else 1 << (n - 1).bit_length()
        step = limit >> 1
        while step:
            if r + step < n:
                children[members[(base + r) % n]].append(members[(base + r + step) % n])
            step >>= 1
    return children


def binomial_tree(members: Iterable[int], root: int, rt: Optional[RankTopology] = None) -> CommTree:
    """Binomial tree over ``members`` using relative ranks from ``root``.

    Relative rank ``r`` sends to ``r + 2**j`` for every power of two below
    the lowest set bit of ``r``, largest offset first.  Without ``rt`` all
    edges are labelled intra-machine.
    """
    ordered = _check_members(members, root)
    return _finish(root, ordered, _binomial_children(ordered, root), rt)


def flat_tree(members: Iterable[int], root: int, rt: Optional[RankTopology] = None) -> CommTree:
    ordered = _check_members(members, root)
    children = {root: [m for m in ordered if m != root]}
    return _finish(root, ordered, children, rt)


def representative(group_members: Iterable[int], root: int) -> int:
    """The rank through which a group is entered: the root if present, else the lowest rank."""
    group = list(group_members)
    if not group:
        raise ValueError("empty group")
    return root if root in group else min(group)


def _shape_children(shape: str, members: list[int], root: int) -> dict[int, list[int]]:
    if shape == FLAT:
        return {root: [m for m in members if m != root]}
    return _binomial_children(members, root)


def _partition(members: Sequence[int], key) -> list[list[int]]:
    groups: dict[int, list[int]] = {}
    for m in members:
        groups.setdefault(key(m), []).append(m)
    return [groups[k] for k in sorted(groups)]


def _hierarchical(rt: RankTopology, members: Iterable[int], root: int,
                  keys, shapes) -> CommTree:
    """Build a tree by recursive partitioning.

    ``keys[i]`` maps a rank to its group at tier ``i`` and ``shapes[i]`` is the
    tree shape over the representatives of those groups.  The last shape is
    used inside the innermost groups.  Each node sends to its outermost-tier
    children first.
    """
    ordered = _check_members(members, root)
    children: dict[int, list[int]] = {m: [] for m in ordered}

    def build(group: list[int], entry: int, depth: int):
        if depth == len(keys):
            for u, kids in _shape_children(shapes[depth], group, entry).items():
                children[u].extend(kids)
            return
        parts = _partition(group, keys[depth])
        reps = [representative(p, entry) for p in parts]
        for u, kids in _shape_children(shapes[depth], sorted(reps), entry).items():
            children[u].extend(kids)
        for part, rep in zip(parts, reps):
            build(part, rep, depth + 1)

    build(ordered, root, 0)
    return _finish(root, ordered, children, rt)


def two_level_tree(rt: RankTopology, members: Iterable[int], root: int,
                   boundary: str = "machine") -> CommTree:
    """Flat tree over cluster representatives, binomial trees inside clusters.

    ``boundary`` is ``"machine"`` (one cluster per machine group) or
    ``"lan"`` (one cluster per LAN group).
    """
    if boundary == "machine":
        key = rt.machine_of
    elif boundary == "lan":
        key = rt.lan_of
    else:
        raise ValueError(f"boundary must be 'machine' or 'lan', got {boundary!r}")
    return _hierarchical(rt, members, root, [key], [FLAT, BINOMIAL])


def multilevel_tree(rt: RankTopology, members: Iterable[int], root: int,
                    policy: Optional[TreePolicy] = None) -> CommTree:
    policy = policy or TreePolicy()
    return _hierarchical(
        rt, members, root,
        [rt.lan_of, rt.machine_of],
        [policy.shape(WAN), policy.shape(LAN), policy.shape(LOCAL)],
    )


def build_tree(algorithm: str, rt: RankTopology, root: int,
               members: Optional[Iterable[int]] = None) -> CommTree:
    """Build the broadcast tree named by ``algorithm`` (see ``ALGORITHMS``)."""
    if members is None:
        members = range(rt.num_ranks)
    if algorithm == "binomial":
        return binomial_tree(members, root, rt)
    if algorithm == "2level-machine":
        return two_level_tree(rt, members, root, "machine")
    if algorithm == "2level-lan":
        return two_level_tree(rt, members, root, "lan")
    if algorithm == "multilevel":
        return multilevel_tree(rt, members, root)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {', '.join(ALGORITHMS)}")
