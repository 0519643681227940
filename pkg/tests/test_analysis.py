import math

import pytest
from hypothesis import given, strategies as st

from hiercoll.analysis import (
    CostParams,
    binomial_cost_estimate,
    compare,
    multilevel_cost_estimate,
    rotating_root_bench,
)
from hiercoll.topology import parse_topology, topology_vectors
from hiercoll.trees import build_tree

from support import FIG5

FIG5_SPEC = parse_topology(FIG5)


def params(P=16, C=4, N=1e6, l_s=0.05, b_s=1e6, l_f=1e-5, b_f=1e8):
    return CostParams(P, C, N, l_s, b_s, l_f, b_f)


def test_binomial_estimate_value():
    assert binomial_cost_estimate(params()) == pytest.approx(2.12002, rel=1e-12)


def test_multilevel_estimate_value():
    assert multilevel_cost_estimate(params()) == pytest.approx(1.07002, rel=1e-12)


def test_single_cluster():
    p = params(C=1)
    expected = 4 * (1e-5 + 0.01)
    assert binomial_cost_estimate(p) == pytest.approx(expected)
    assert multilevel_cost_estimate(p) == pytest.approx(expected)


def test_two_clusters_coincide():
    p = params(C=2)
    assert multilevel_cost_estimate(p) == binomial_cost_estimate(p)


def test_latency_only_limit():
    p = params(N=0)
    assert binomial_cost_estimate(p) == pytest.approx(2 * 0.05 + 2 * 1e-5)
    assert multilevel_cost_estimate(p) == pytest.approx(0.05 + 2 * 1e-5)


@pytest.mark.parametrize("kw", [dict(P=12), dict(C=3), dict(P=16, C=6)])
def test_rejects_non_powers_of_two(kw):
    with pytest.raises(ValueError, match="power of two"):
        binomial_cost_estimate(params(**kw))
    with pytest.raises(ValueError, match="power of two"):
        multilevel_cost_estimate(params(**kw))


@pytest.mark.parametrize("kw", [dict(P=2, C=4), dict(C=0), dict(b_s=0), dict(l_f=-1)])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        params(**kw)


pos = st.floats(1e-6, 1e3)


@given(st.integers(0, 10), st.integers(0, 10), st.floats(0, 1e9), pos, pos, pos, pos,
       st.sampled_from(["N", "l_s", "l_f", "b_s", "b_f"]), st.floats(1.01, 100))
def test_estimates_monotone(k, i, N, l_s, b_s, l_f, b_f, field, factor):
    i = min(i, k)
    p = CostParams(2**k, 2**i, N, l_s, b_s, l_f, b_f)
    bumped = dict(vars(p))
    bumped[field] = bumped[field] * factor + (1.0 if field == "N" else 0.0)
    q = CostParams(**bumped)
    for fn in (binomial_cost_estimate, multilevel_cost_estimate):
        if field.startswith("b_"):
            assert fn(q) <= fn(p) * (1 + 1e-12)
        else:
            assert fn(q) >= fn(p) * (1 - 1e-12)
    if i >= 1:
        assert multilevel_cost_estimate(p) <= binomial_cost_estimate(p) * (1 + 1e-12)


def test_compare_fig5_multilevel_beats_binomial():
    sizes = [1024, 16384, 262144, 1 << 20]
    rows = compare(FIG5_SPEC, ["binomial", "multilevel"], sizes)
    assert len(rows) == 8
    total = {(r.algorithm, r.message_size): r for r in rows}
    for size in sizes:
        assert total["multilevel", size].total_time < total["binomial", size].total_time
        assert total["multilevel", size].wan_msgs == 20
        assert total["binomial", size].wan_msgs >= 20


def test_compare_level0_counts_per_broadcast():
    rt = topology_vectors(FIG5_SPEC)
    lan_groups = len(rt.lan_groups)
    for root in range(20):
        (row,) = compare(FIG5_SPEC, ["binomial"], [8], roots=[root])
        tree = build_tree("binomial", rt, root)
        assert row.wan_msgs == sum(1 for u, v in tree.edges if rt.lan_of(u) != rt.lan_of(v))
        assert row.wan_msgs >= math.log2(lan_groups)
        (row,) = compare(FIG5_SPEC, ["multilevel"], [8], roots=[root])
        assert row.wan_msgs == lan_groups - 1


def test_compare_single_row():
    rows = compare(FIG5_SPEC, ["multilevel"], [1024], roots=[3])
    assert len(rows) == 1
    assert rows[0].root == 3
    assert rows[0].total_time == rows[0].makespan_max


def test_compare_unknown_algorithm():
    with pytest.raises(ValueError, match="unknown algorithm"):
        compare(FIG5_SPEC, ["magpie"], [1])


def even_layout(P, C, l_s, b_s, l_f, b_f):
    lines = [f"link level=0 latency={l_s} bandwidth={b_s}",
             f"link level=1 latency={l_f} bandwidth={b_f}",
             f"link level=2 latency={l_f} bandwidth={b_f}"]
    lines += [f"subjob count={P // C} machine=m{c}" for c in range(C)]
    return parse_topology("\n".join(lines))


@pytest.mark.parametrize("P, C", [(8, 2), (8, 4), (16, 2), (16, 4), (16, 8), (32, 4)])
@pytest.mark.parametrize("N", [0, 1000, 10**6])
@pytest.mark.parametrize("l_s, b_s", [(0.05, 1e6), (1e-3, 1e5)])
def test_simulated_ordering_agrees_with_estimates(P, C, N, l_s, b_s):
    l_f, b_f = 1e-5, 1e8
    spec = even_layout(P, C, l_s, b_s, l_f, b_f)
    rows = {r.algorithm: r.total_time for r in compare(spec, ["binomial", "multilevel"], [N])}
    p = CostParams(P, C, N, l_s, b_s, l_f, b_f)
    assert multilevel_cost_estimate(p) <= binomial_cost_estimate(p)
    assert rows["multilevel"] <= rows["binomial"]
    if multilevel_cost_estimate(p) < binomial_cost_estimate(p):
        assert rows["multilevel"] < rows["binomial"]


def test_one_port_rotating_root_ordering_for_large_messages():
    # with payload serialization on the sender, two back-to-back WAN sends
    # outweigh one extra LAN hop once messages exceed ~1.1 KB
    sizes = [16 * 1024, 256 * 1024, 1024 * 1024]
    totals = {alg: [r.total_time for r in rotating_root_bench(FIG5_SPEC, alg, sizes, hold_sender=True)]
              for alg in ("multilevel", "2level-machine", "binomial")}
    for ml, tm, bn in zip(totals["multilevel"], totals["2level-machine"], totals["binomial"]):
        assert ml < tm < bn
