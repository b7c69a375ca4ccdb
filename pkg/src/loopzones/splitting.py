"""Target-zone selection and contiguity-constrained two-way clustering."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .classify import ZoneRank
from .network import Network, ZoneMap, id_sort_key

# distances closer than this are treated as ties
_TIE_DECIMALS = 9


class NoLoopFlows(RuntimeError):
    """Nothing to split: no zone causes any loop flow."""


class SplitError(ValueError):
    pass


@dataclass(frozen=True)
class Merge:
    left: tuple
    right: tuple
    distance: float

    def to_json_dict(self) -> dict:
        return {"left": list(self.left), "right": list(self.right), "distance": self.distance}


@dataclass(frozen=True, eq=False)
class SplitResult:
    target_zone: Hashable
    new_zone_map: ZoneMap
    cluster_features: dict
    merge_trace: list[Merge] = field(default_factory=list)
    source_zone: Hashable = None
    sink_zone: Hashable = None
    degenerate: bool = False

    def to_json_dict(self) -> dict:
        return {
            "target_zone": self.target_zone,
            "source_zone": self.source_zone,
            "sink_zone": self.sink_zone,
            "degenerate": self.degenerate,
            "features": [{"node": n, "p_lf": v} for n, v in self.cluster_features.items()],
            "merges": [m.to_json_dict() for m in self.merge_trace],
        }


def select_target_zone(ranking: Sequence[ZoneRank], tol: float = 1e-9) -> Hashable:
    if not ranking:
        raise SplitError("empty zone ranking")
    top = ranking[0]
    if top.lf_total_mw <= tol:
        raise NoLoopFlows("no loop flows: the zonal configuration is already converged")
    return top.zone


def _adjacency(network: Network, members: set) -> dict:
    adj = {n: set() for n in members}
    for ln in network.lines:
        if ln.from_node in members and ln.to_node in members:
            adj[ln.from_node].add(ln.to_node)
            adj[ln.to_node].add(ln.from_node)
    return adj


def _connected(nodes: set, adj: dict) -> bool:
    if not nodes:
        return False
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v in nodes and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen == nodes


def split_zone(
    network: Network,
    zone_map: ZoneMap,
    target: Hashable,
    p_lf: np.ndarray | dict,
    names: tuple[Hashable, Hashable] | None = None,
) -> SplitResult:
    """Split ``target`` into two contiguous sub-zones by agglomerative clustering.

    Each node's feature is its loop-flow injection. Clusters merge only if an
    intra-zone line joins them; the merge distance is the absolute
    difference of the clusters' mean features. Equal distances are broken
    in favour of the pair holding the lowest node id. Merging stops at two
    clusters; the one with the higher mean becomes the source zone
    (``names[0]``, default ``"<target>_src"``) and the other the sink zone.
    """
    members = [n for n in network.node_ids if zone_map[n] == target]
    if len(members) < 2:
        raise SplitError(f"zone {target!r} needs at least two nodes to split")
    adj = _adjacency(network, set(members))
    if not _connected(set(members), adj):
        raise SplitError(f"zone {target!r} is not connected internally")

    if isinstance(p_lf, dict):
        feature = {n: float(p_lf[n]) for n in members}
    else:
        p_lf = np.asarray(p_lf, dtype=float)
        feature = {n: float(p_lf[network.node_index(n)]) for n in members}

    if names is None:
        names = (f"{target}_src", f"{target}_snk")
    src_name, snk_name = names
    if src_name == snk_name:
        raise SplitError("sub-zone names must differ")
    others = zone_map.zones - {target}
    clash = {src_name, snk_name} & others
    if clash:
        raise SplitError(f"sub-zone names collide with existing zones {sorted(clash, key=id_sort_key)}")

    clusters = [tuple(sorted([n], key=id_sort_key)) for n in sorted(members, key=id_sort_key)]
    merges = []
    while len(clusters) > 2:
        best = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                ca, cb = clusters[a], clusters[b]
                if not any(adj[u] & set(cb) for u in ca):
                    continue
                d = abs(np.mean([feature[n] for n in ca]) - np.mean([feature[n] for n in cb]))
                key = (round(d, _TIE_DECIMALS), sorted([id_sort_key(ca[0]), id_sort_key(cb[0])]))
                if best is None or key < best[0]:
                    best = (key, a, b, d)
        _, a, b, d = best
        merges.append(Merge(clusters[a], clusters[b], float(d)))
        merged = tuple(sorted(clusters[a] + clusters[b], key=id_sort_key))
        clusters = [c for i, c in enumerate(clusters) if i not in (a, b)] + [merged]
        clusters.sort(key=lambda c: id_sort_key(c[0]))

    means = [np.mean([feature[n] for n in c]) for c in clusters]
    # equal means: the cluster holding the lowest id is the source
    src, snk = (0, 1) if means[0] >= means[1] else (1, 0)
    assignment = dict(zone_map.assignment)
    for n in clusters[src]:
        assignment[n] = src_name
    for n in clusters[snk]:
        assignment[n] = snk_name
    values = list(feature.values())
    degenerate = bool(np.ptp(values) <= 10.0**-_TIE_DECIMALS)
    return SplitResult(
        target_zone=target,
        new_zone_map=ZoneMap(assignment),
        cluster_features=feature,
        merge_trace=merges,
        source_zone=src_name,
        sink_zone=snk_name,
        degenerate=degenerate,
    )
