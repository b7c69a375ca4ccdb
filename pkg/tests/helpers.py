"""Random instance generators and independent oracles for the test suite."""

from __future__ import annotations

import itertools
from collections import defaultdict

import numpy as np

from loopzones import Line, Node, Scenario, build_network


def random_network(rng: np.random.Generator, max_nodes: int = 20, max_lines: int = 30, n_zones: int = 4):
    n = int(rng.integers(2, max_nodes + 1))
    lines = []
    order = rng.permutation(n)
    # random spanning tree keeps the graph connected
    for pos in range(1, n):
        a = int(order[pos])
        b = int(order[rng.integers(0, pos)])
        lines.append((a, b))
    extra = int(rng.integers(0, max(0, max_lines - len(lines)) + 1))
    for _ in range(extra):
        a, b = rng.choice(n, size=2, replace=False)
        lines.append((int(a), int(b)))
    zones = rng.integers(0, n_zones, size=n)
    nodes = [Node(i + 1, f"Z{zones[i]}") for i in range(n)]
    objs = [
        Line(k + 1, a + 1, b + 1, float(rng.uniform(0.01, 0.5)), float(rng.uniform(50, 500)))
        for k, (a, b) in enumerate(lines)
    ]
    return build_network(nodes, objs)


def random_scenario(rng: np.random.Generator, n: int, label: str = "r") -> Scenario:
    gen = np.where(rng.random(n) < 0.4, rng.uniform(10, 300, n), 0.0)
    if gen.sum() == 0:
        gen[rng.integers(0, n)] = 100.0
    load = np.where(rng.random(n) < 0.7, rng.uniform(10, 300, n), 0.0)
    if load.sum() == 0:
        load[rng.integers(0, n)] = 100.0
    load *= gen.sum() / load.sum()
    # exact balance after scaling
    load[np.argmax(load)] += gen.sum() - load.sum()
    return Scenario(gen, load, label)


def random_dag_flows(rng: np.random.Generator, max_nodes: int = 8, max_lines: int = 12):
    """Random acyclic flow network with consistent gen/load.

    Returns ``(network, flows, scenario)``; every flow is positive and lines
    point from lower to higher rank in a random topological order.
    """
    n = int(rng.integers(2, max_nodes + 1))
    rank = rng.permutation(n)
    arcs = []

    def add(a, b):
        arcs.append((a, b) if rank[a] < rank[b] else (b, a))

    for u in range(1, n):
        add(u, int(rng.integers(0, u)))
    for _ in range(int(rng.integers(0, max_lines - len(arcs) + 1))):
        a, b = rng.choice(n, size=2, replace=False)
        add(int(a), int(b))
    flows = rng.uniform(1.0, 100.0, len(arcs))
    net_out = np.zeros(n)
    for (a, b), f in zip(arcs, flows):
        net_out[a] += f
        net_out[b] -= f
    extra = np.where(rng.random(n) < 0.5, rng.uniform(0, 50, n), 0.0)
    gen = np.maximum(net_out, 0.0) + extra
    load = np.maximum(-net_out, 0.0) + extra
    nodes = [Node(i + 1, f"Z{int(rng.integers(0, 3))}") for i in range(n)]
    lines = [Line(k + 1, a + 1, b + 1, 0.1) for k, (a, b) in enumerate(arcs)]
    return build_network(nodes, lines), flows, Scenario(gen, load, "dag")


def path_oracle_exchange(n: int, arcs, gen, load):
    """Brute-force PSP exchange matrices by walking every source-to-sink path.

    ``arcs`` is a list of ``(from, to, flow)`` with positive flows on an
    acyclic digraph over nodes ``0..n-1``. Generator j's output is pushed
    forward; at every node it splits in proportion to the outgoing lines
    and the local load. Returns ``{line index: n x n list X[i][j]}``.
    """
    inflow = [0.0] * n
    out_arcs = defaultdict(list)
    for k, (a, b, f) in enumerate(arcs):
        inflow[b] += f
        out_arcs[a].append((k, b, f))
    through = [inflow[i] + gen[i] for i in range(n)]
    X = {k: [[0.0] * n for _ in range(n)] for k in range(len(arcs))}

    def walk(j, u, amount, used):
        if amount == 0.0:
            return
        share_to_load = load[u] / through[u]
        for k in used:
            X[k][u][j] += amount * share_to_load
        for k, v, f in out_arcs[u]:
            walk(j, v, amount * f / through[u], used + (k,))

    for j in range(n):
        if gen[j] > 0:
            walk(j, j, gen[j], ())
    return X


def connected_bipartitions(nodes, edges):
    """All splits of ``nodes`` into two non-empty parts that are each connected."""
    nodes = list(nodes)
    adj = defaultdict(set)
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)

    def connected(part):
        part = set(part)
        start = next(iter(part))
        seen, stack = {start}, [start]
        while stack:
            u = stack.pop()
            for v in (adj[u] & part) - seen:
                seen.add(v)
                stack.append(v)
        return seen == part

    first, rest = nodes[0], nodes[1:]
    for r in range(0, len(rest)):
        for combo in itertools.combinations(rest, r):
            left = {first, *combo}
            right = set(nodes) - left
            if right and connected(left) and connected(right):
                yield left, right


def fig1_system():
    """Mixing node ``x`` fed by lines A (90 MW) and B (10 MW), feeding C/D/E (20/50/30 MW)."""
    nodes = [Node(n, "Z") for n in ("a", "b", "x", "c", "d", "e")]
    lines = [
        Line("A", "a", "x", 0.1),
        Line("B", "b", "x", 0.1),
        Line("C", "x", "c", 0.1),
        Line("D", "x", "d", 0.1),
        Line("E", "x", "e", 0.1),
    ]
    net = build_network(nodes, lines)
    flows = np.array([90.0, 10.0, 20.0, 50.0, 30.0])
    scen = Scenario([90.0, 10.0, 0, 0, 0, 0], [0, 0, 0, 20.0, 50.0, 30.0])
    return net, flows, scen
