"""Command-line front end.

    hiercoll run   --topology fig5.topo --collective bcast --algorithm multilevel --sizes 1024 --root 0
    hiercoll bench --topology fig5.topo --algorithm binomial --sizes 1024,1048576
    hiercoll tree  --topology fig5.topo --algorithm multilevel --root 0 --output tree.dot
"""

from __future__ import annotations

import argparse
import contextlib
import sys

from hiercoll.analysis import BenchRow, rotating_root_bench
from hiercoll.collectives import (
    SUM,
    bcast_schedule,
    fan_in_fan_out,
    gather_schedule,
    reduce_schedule,
    scatter_schedule,
)
from hiercoll.simnet import ScheduleError, simulate
from hiercoll.topology import TopologyError, load_topology, topology_vectors
from hiercoll.trees import ALGORITHMS, build_tree

COLLECTIVES = ("bcast", "reduce", "barrier", "gather", "scatter")


class UsageError(Exception):
    pass


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid size list {text!r}") from None
    if not sizes or any(s < 0 for s in sizes):
        raise argparse.ArgumentTypeError(f"invalid size list {text!r}")
    return sizes


def _root(text: str):
    if text == "all":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"root must be a rank or 'all', got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hiercoll", description="Topology-aware collective trees on a simulated network.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, collective=False, root=True, sizes=True):
        p.add_argument("--topology", required=True, help="topology config file")
        p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
        if collective:
            p.add_argument("--collective", default="bcast", choices=COLLECTIVES)
        if sizes:
            p.add_argument("--sizes", type=_sizes, default=[1024], help="comma-separated message sizes in bytes")
        if root:
            p.add_argument("--root", type=_root, default=0, help="root rank or 'all'")
        p.add_argument("--output", help="output path (default: stdout)")
        if sizes:
            p.add_argument("--trace", help="write the simulator event trace here")
            p.add_argument("--hold-sender", action="store_true",
                           help="keep senders busy for the payload serialization time")

    common(sub.add_parser("run", help="simulate one collective"), collective=True)
    common(sub.add_parser("bench", help="rotating-root broadcast benchmark"), root=False)
    common(sub.add_parser("tree", help="export a broadcast tree as DOT"), sizes=False)
    return parser


def _schedule(collective, tree, size):
    if collective == "bcast":
        return bcast_schedule(tree, size)
    if collective == "reduce":
        return reduce_schedule(tree, size, SUM)
    if collective == "gather":
        return gather_schedule(tree, size)
    if collective == "scatter":
        return scatter_schedule(tree, size)
    return fan_in_fan_out(tree)


def _check_root(root, n):
    if root != "all" and not 0 <= root < n:
        raise UsageError(f"--root {root} out of range 0..{n - 1}")


def cmd_run(args, out, trace) -> None:
    spec = load_topology(args.topology)
    rt = topology_vectors(spec)
    _check_root(args.root, rt.num_ranks)
    if args.collective == "barrier":
        roots = [0]
    else:
        roots = range(rt.num_ranks) if args.root == "all" else [args.root]
    trees = [build_tree(args.algorithm, rt, r) for r in roots]

    out.write(BenchRow.HEADER + "\n")
    for size in args.sizes:
        total = worst = 0.0
        counts = [0, 0, 0]
        for tree in trees:
            rep = simulate(_schedule(args.collective, tree, size), rt, spec.links,
                           trace=trace, hold_sender=args.hold_sender)
            total += rep.makespan
            worst = max(worst, rep.makespan)
            counts = [a + b for a, b in zip(counts, rep.level_counts)]
        label = trees[0].root if len(trees) == 1 else "all"
        out.write(BenchRow(size, args.algorithm, label, total, worst, *counts).csv() + "\n")


def cmd_bench_rotating_root(args, out, trace) -> None:
    spec = load_topology(args.topology)
    rows = rotating_root_bench(spec, args.algorithm, args.sizes, hold_sender=args.hold_sender)
    out.write(BenchRow.HEADER + "\n")
    for row in rows:
        out.write(row.csv() + "\n")


def cmd_tree(args, out, trace) -> None:
    spec = load_topology(args.topology)
    rt = topology_vectors(spec)
    if args.root == "all":
        raise UsageError("--root must be a single rank for tree export")
    _check_root(args.root, rt.num_ranks)
    out.write(build_tree(args.algorithm, rt, args.root).to_dot())


COMMANDS = {"run": cmd_run, "bench": cmd_bench_rotating_root, "tree": cmd_tree}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with contextlib.ExitStack() as stack:
            out = sys.stdout
            if args.output:
                out = stack.enter_context(open(args.output, "w", encoding="utf-8", newline=""))
            trace = None
            if getattr(args, "trace", None):
                trace = stack.enter_context(open(args.trace, "w", encoding="utf-8"))
            COMMANDS[args.command](args, out, trace)
    except (TopologyError, ScheduleError, UsageError, ValueError, OSError) as exc:
        print(f"hiercoll {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
