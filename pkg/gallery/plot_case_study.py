"""
Loop flows in the four-node test system
=======================================

Nodes 1 and 3 form zone A, nodes 2 and 4 zone B. Generator 1 serves load 3
partly through zone B, so some of zone B's lines carry flow that zone A's
internal trade put there.
"""

import numpy as np

from loopzones import PipelineConfig, optimize_zones, solve_dc
from loopzones.cases import bialek4

np.set_printoptions(precision=2, suppress=True)
network, scenario = bialek4()

###############################################################################
# DC load flow for the given injections

sol = solve_dc(network, scenario)
for line, f in zip(network.lines, sol.flows):
    print(f"line {line.id}: {line.from_node} -> {line.to_node}  {f:7.2f} MW")

###############################################################################
# Decompose, rank zones, split the worst one. The sub-zones are named so that
# node 1 keeps the name A and node 3 becomes zone C.

report = optimize_zones(network, [scenario], config=PipelineConfig(split_names=("A", "C")))


def show(table, title):
    print(f"\n{title}\nline      IN      IE      TR      LF")
    for lid, row in zip(table.line_ids, table.as_array()):
        print(f"({lid})  " + "  ".join(f"{v:6.2f}" for v in row))


show(report.pre.table, "before the split")
print("\nranking:", [(r.zone, round(r.lf_total_mw, 2)) for r in report.ranking])
print("loop-flow injections:", report.pre.p_lf)
print("new zones:", report.split.new_zone_map.assignment)
show(report.post.table, "after the split")
print(f"\ntotal loop flow {report.total_lf_pre:.2f} -> {report.total_lf_post:.2f} MW")
