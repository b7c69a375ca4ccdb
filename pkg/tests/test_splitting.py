import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import connected_bipartitions, random_network
from loopzones import (
    Line,
    Node,
    NoLoopFlows,
    ZoneMap,
    build_network,
    decompose,
    rank_zones,
    select_target_zone,
    solve_dc,
    split_zone,
    trace,
)
from loopzones.classify import ZoneRank
from loopzones.network import _is_connected
from loopzones.splitting import SplitError


def chain(values, outside=True):
    """Zone T laid out as a path n1 - n2 - ..., optionally hung off an outside node."""
    ids = [f"n{i + 1}" for i in range(len(values))]
    nodes = [Node(n, "T") for n in ids]
    lines = [Line(f"c{i}", a, b, 0.1) for i, (a, b) in enumerate(zip(ids, ids[1:]))]
    if outside:
        nodes.append(Node("o", "U"))
        lines.append(Line("ext", ids[0], "o", 0.1))
    net = build_network(nodes, lines)
    return net, dict(zip(ids, values))


def sse(parts, feature):
    return sum(sum((feature[n] - np.mean([feature[m] for m in p])) ** 2 for n in p) for p in parts)


def test_case_split_separates_nodes_1_and_3(case_network, case_scenario):
    tr = trace(case_network, solve_dc(case_network, case_scenario).flows, case_scenario)
    from loopzones import incidence, loop_injections

    table = decompose(tr)
    p_lf = loop_injections(incidence(tr.network), table.lf_mw)
    target = select_target_zone(rank_zones(table, case_network.zone_map))
    assert target == "A"
    res = split_zone(case_network, case_network.zone_map, target, p_lf)
    assert res.new_zone_map.assignment == {1: "A_src", 2: "B", 3: "A_snk", 4: "B"}
    assert not res.degenerate
    assert len(res.merge_trace) == 0


def test_chain_split_matches_min_variance_brute_force():
    values = (5.0, 3.0, -2.0, -6.0)
    net, feature = chain(values)
    res = split_zone(net, net.zone_map, "T", feature)
    got = {frozenset(res.new_zone_map.nodes_in(z)) for z in (res.source_zone, res.sink_zone)}
    edges = [(ln.from_node, ln.to_node) for ln in net.lines if ln.id != "ext"]
    best = min(connected_bipartitions(feature, edges), key=lambda p: sse(p, feature))
    assert got == {frozenset(best[0]), frozenset(best[1])}
    assert got == {frozenset({"n1", "n2"}), frozenset({"n3", "n4"})}
    assert res.new_zone_map["n1"] == "T_src" and res.new_zone_map["o"] == "U"
    assert [m.distance for m in res.merge_trace] == [2.0, 4.0]


def test_uniform_features_are_degenerate_but_deterministic():
    net, feature = chain((1.0, 1.0, 1.0, 1.0))
    a = split_zone(net, net.zone_map, "T", feature)
    b = split_zone(net, net.zone_map, "T", feature)
    assert a.degenerate
    assert a.new_zone_map.assignment == b.new_zone_map.assignment
    assert a.new_zone_map.nodes_in("T_src") == ["n1", "n2", "n3"]
    assert a.new_zone_map.nodes_in("T_snk") == ["n4"]


def test_custom_names(case_network):
    res = split_zone(case_network, case_network.zone_map, "A", [1.0, 0, -1.0, 0], names=("A", "C"))
    assert res.new_zone_map.assignment == {1: "A", 2: "B", 3: "C", 4: "B"}
    with pytest.raises(SplitError, match="collide"):
        split_zone(case_network, case_network.zone_map, "A", [1.0, 0, -1.0, 0], names=("A", "B"))


def test_split_errors():
    net, feature = chain((1.0,))
    with pytest.raises(SplitError, match="at least two"):
        split_zone(net, net.zone_map, "T", feature)
    nodes = [Node(1, "T"), Node(2, "U"), Node(3, "T")]
    net = build_network(nodes, [Line(1, 1, 2, 0.1), Line(2, 2, 3, 0.1)])
    with pytest.raises(SplitError, match="not connected"):
        split_zone(net, net.zone_map, "T", [1.0, 0.0, -1.0])


def test_select_target_zone():
    assert select_target_zone([ZoneRank("A", 5.0, "absolute"), ZoneRank("B", 1.0, "absolute")]) == "A"
    with pytest.raises(NoLoopFlows, match="no loop flows"):
        select_target_zone([ZoneRank("A", 0.0, "absolute")])


def test_tie_goes_to_lower_zone_id(tied_ranking):
    assert select_target_zone(tied_ranking) == "A"


@pytest.fixture
def tied_ranking():
    from loopzones.classify import DecompositionTable

    table = DecompositionTable(
        line_ids=[1],
        flows=np.array([4.0]),
        in_mw=np.zeros(1),
        ie_mw=np.zeros(1),
        tr_mw=np.zeros(1),
        lf_mw=np.array([4.0]),
        lf_by_zone={"B": np.array([2.0]), "A": np.array([2.0])},
        capacity=np.array([np.nan]),
    )
    return rank_zones(table, ZoneMap({1: "B", 2: "A"}))


def _sub_connected(net, nodes):
    nodes = list(nodes)
    pos = {n: i for i, n in enumerate(nodes)}
    edges = [
        (pos[ln.from_node], pos[ln.to_node])
        for ln in net.lines
        if ln.from_node in pos and ln.to_node in pos
    ]
    return _is_connected(len(nodes), edges)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_split_invariants_random(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n_zones=2)
    candidates = [
        z for z in net.zone_map.zones
        if len(net.zone_map.nodes_in(z)) >= 2 and _sub_connected(net, net.zone_map.nodes_in(z))
    ]
    if not candidates:
        return
    target = sorted(candidates)[0]
    p_lf = rng.normal(0, 50, net.N)
    res = split_zone(net, net.zone_map, target, p_lf)
    new = res.new_zone_map
    assert len(new.zones) == len(net.zone_map.zones) + 1
    for sub in (res.source_zone, res.sink_zone):
        members = new.nodes_in(sub)
        assert members and _sub_connected(net, members)
    for n, z in net.zone_map.assignment.items():
        if z != target:
            assert new[n] == z
    src_mean = np.mean([p_lf[net.node_index(n)] for n in new.nodes_in(res.source_zone)])
    snk_mean = np.mean([p_lf[net.node_index(n)] for n in new.nodes_in(res.sink_zone)])
    assert src_mean >= snk_mean


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sign_separation_on_clustered_instances(seed):
    rng = np.random.default_rng(seed)
    n_pos, n_neg = int(rng.integers(1, 6)), int(rng.integers(1, 6))
    pos = [f"p{i}" for i in range(n_pos)]
    neg = [f"q{i}" for i in range(n_neg)]
    lines = []
    for group in (pos, neg):
        for i in range(1, len(group)):
            lines.append((group[i], group[int(rng.integers(0, i))]))
    for _ in range(int(rng.integers(1, 4))):
        lines.append((pos[int(rng.integers(0, n_pos))], neg[int(rng.integers(0, n_neg))]))
    nodes = [Node(n, "T") for n in pos + neg]
    net = build_network(nodes, [Line(k, a, b, 0.1) for k, (a, b) in enumerate(lines)])
    feature = {n: float(rng.uniform(5, 6)) for n in pos} | {n: float(rng.uniform(-6, -5)) for n in neg}
    res = split_zone(net, net.zone_map, "T", feature)
    assert sorted(res.new_zone_map.nodes_in(res.source_zone)) == sorted(pos)
    assert sorted(res.new_zone_map.nodes_in(res.sink_zone)) == sorted(neg)
