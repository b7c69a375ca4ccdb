"""
Proportional sharing at a single node
=====================================

Two lines bring 90 MW and 10 MW into a node; three lines carry 20, 50 and
30 MW away. Under proportional sharing every outgoing line inherits the
9:1 inflow mix.
"""

import numpy as np

from loopzones import Line, Node, Scenario, build_network, trace

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
scenario = Scenario([90, 10, 0, 0, 0, 0], [0, 0, 0, 20, 50, 30])

tr = trace(net, flows, scenario)

###############################################################################
# MW on each outgoing line, by source

for name in "CDE":
    k = net.lookup_line(name)
    print(f"line {name}: from a {tr.G2T[k, 0]:5.1f} MW, from b {tr.G2T[k, 1]:4.1f} MW")

###############################################################################
# The exchange matrix of line D: rows are loads, columns generators

print(tr.exchange(net.lookup_line("D")))
