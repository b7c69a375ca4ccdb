"""Network data model, zone maps and incidence-matrix algebra.

Matrices are laid out with one row per line and one column per node, so the
signed incidence matrix ``G`` is ``M x N``. Node and line order in the input
fixes the indexing everywhere downstream.
"""

from __future__ import annotations

import json
import numbers
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Any, Hashable, Iterable, Mapping

import numpy as np

DEFAULT_EPSILON = 1e-9


class NetworkError(ValueError):
    """Raised for malformed or physically inconsistent network input."""


def id_sort_key(value: Hashable) -> tuple:
    """Sort key that orders numeric ids numerically and puts them before strings."""
    if isinstance(value, numbers.Real) and not isinstance(value, bool):
        return (0, float(value), "")
    return (1, 0.0, str(value))


@dataclass(frozen=True)
class Node:
    id: Hashable
    zone: Hashable


@dataclass(frozen=True)
class Line:
    id: Hashable
    from_node: Hashable
    to_node: Hashable
    reactance: float
    capacity: float | None = None

    def reversed(self) -> "Line":
        return replace(self, from_node=self.to_node, to_node=self.from_node)


@dataclass(frozen=True)
class ZoneMap:
    """Total assignment of node ids to zone ids."""

    assignment: Mapping[Hashable, Hashable]
    zones: frozenset = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        assignment = dict(self.assignment)
        object.__setattr__(self, "assignment", assignment)
        used = frozenset(assignment.values())
        if self.zones is None:
            object.__setattr__(self, "zones", used)
            return
        zones = frozenset(self.zones)
        object.__setattr__(self, "zones", zones)
        missing = used - zones
        if missing:
            raise NetworkError(f"nodes assigned to undeclared zones: {sorted(missing, key=id_sort_key)}")
        empty = zones - used
        if empty:
            raise NetworkError(f"empty zones: {sorted(empty, key=id_sort_key)}")

    def __getitem__(self, node_id: Hashable) -> Hashable:
        return self.assignment[node_id]

    def nodes_in(self, zone: Hashable) -> list:
        return [n for n, z in self.assignment.items() if z == zone]

    def sorted_zones(self) -> list:
        return sorted(self.zones, key=id_sort_key)

    def to_json_dict(self) -> dict:
        return {"nodes": [{"id": n, "zone": z} for n, z in self.assignment.items()]}


@dataclass(frozen=True)
class IncidenceMatrices:
    G: np.ndarray
    G_r: np.ndarray
    G_t: np.ndarray


@dataclass(frozen=True, eq=False)
class Network:
    nodes: tuple[Node, ...]
    lines: tuple[Line, ...]
    zone_map: ZoneMap

    @property
    def N(self) -> int:
        return len(self.nodes)

    @property
    def M(self) -> int:
        return len(self.lines)

    @property
    def node_ids(self) -> list:
        return [n.id for n in self.nodes]

    @property
    def line_ids(self) -> list:
        return [ln.id for ln in self.lines]

    def node_index(self, node_id: Hashable) -> int:
        try:
            return self._node_pos[node_id]
        except KeyError:
            raise NetworkError(f"unknown node id {node_id!r}") from None

    def lookup_node(self, key: Any) -> Hashable:
        """Resolve a node id given either the id itself or its string form."""
        if key in self._node_pos:
            return key
        for nid in self._node_pos:
            if str(nid) == str(key):
                return nid
        raise NetworkError(f"unknown node id {key!r}")

    def lookup_line(self, key: Any) -> int:
        """Index of the line whose id (or its string form) equals ``key``."""
        for k, ln in enumerate(self.lines):
            if ln.id == key or str(ln.id) == str(key):
                return k
        raise NetworkError(f"unknown line id {key!r}")

    @cached_property
    def from_index(self) -> np.ndarray:
        return np.array([self._node_pos[ln.from_node] for ln in self.lines], dtype=int)

    @cached_property
    def to_index(self) -> np.ndarray:
        return np.array([self._node_pos[ln.to_node] for ln in self.lines], dtype=int)

    @cached_property
    def _node_pos(self) -> dict:
        return {n.id: i for i, n in enumerate(self.nodes)}

    def with_zone_map(self, zone_map: ZoneMap) -> "Network":
        _check_zone_map(self.nodes, zone_map)
        return Network(self.nodes, self.lines, zone_map)

    def to_json_dict(self) -> dict:
        lines = []
        for ln in self.lines:
            entry = {"id": ln.id, "from": ln.from_node, "to": ln.to_node, "reactance": ln.reactance}
            if ln.capacity is not None:
                entry["capacity"] = ln.capacity
            lines.append(entry)
        nodes = [{"id": n.id, "zone": self.zone_map[n.id]} for n in self.nodes]
        return {"nodes": nodes, "lines": lines}


def _check_zone_map(nodes: Iterable[Node], zone_map: ZoneMap) -> None:
    ids = {n.id for n in nodes}
    missing = ids - set(zone_map.assignment)
    if missing:
        raise NetworkError(f"zone map misses nodes {sorted(missing, key=id_sort_key)}")
    extra = set(zone_map.assignment) - ids
    if extra:
        raise NetworkError(f"zone map names unknown nodes {sorted(extra, key=id_sort_key)}")


def _is_connected(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == n


def build_network(
    nodes: Iterable[Node], lines: Iterable[Line], zone_map: ZoneMap | None = None
) -> Network:
    """Validate nodes and lines and assemble a :class:`Network`.

    If ``zone_map`` is omitted the zones attached to the nodes are used;
    otherwise the map overrides them.

    Raises
    ------
    NetworkError
        On duplicate ids, dangling or self-looping lines, non-positive
        reactances, a disconnected graph, or an inconsistent zone map.
    """
    nodes = tuple(nodes)
    lines = tuple(lines)
    if len(nodes) < 2 or not lines:
        raise NetworkError("a network needs at least two nodes and one line")

    pos: dict = {}
    for i, n in enumerate(nodes):
        if n.id in pos:
            raise NetworkError(f"duplicate node id {n.id!r}")
        pos[n.id] = i

    seen_lines = set()
    edges = []
    for ln in lines:
        if ln.id in seen_lines:
            raise NetworkError(f"duplicate line id {ln.id!r}")
        seen_lines.add(ln.id)
        for end in (ln.from_node, ln.to_node):
            if end not in pos:
                raise NetworkError(f"line {ln.id!r} has dangling endpoint {end!r}")
        if ln.from_node == ln.to_node:
            raise NetworkError(f"line {ln.id!r} is a self-loop")
        if not ln.reactance > 0:
            raise NetworkError(f"line {ln.id!r} needs a positive reactance")
        if ln.capacity is not None and not ln.capacity > 0:
            raise NetworkError(f"line {ln.id!r} has a non-positive capacity")
        edges.append((pos[ln.from_node], pos[ln.to_node]))

    if not _is_connected(len(nodes), edges):
        raise NetworkError("network graph is disconnected")

    if zone_map is None:
        zone_map = ZoneMap({n.id: n.zone for n in nodes})
    _check_zone_map(nodes, zone_map)
    nodes = tuple(Node(n.id, zone_map[n.id]) for n in nodes)
    return Network(nodes, lines, zone_map)


def incidence(network: Network) -> IncidenceMatrices:
    """Signed incidence matrix ``G = G_r - G_t`` with rows indexed by line."""
    rows = np.arange(network.M)
    G_r = np.zeros((network.M, network.N))
    G_t = np.zeros((network.M, network.N))
    G_r[rows, network.from_index] = 1.0
    G_t[rows, network.to_index] = 1.0
    return IncidenceMatrices(G=G_r - G_t, G_r=G_r, G_t=G_t)


def topological_order(n: int, arcs: Iterable[tuple[int, int]]) -> list[int] | None:
    """Kahn's algorithm; returns ``None`` if the digraph has a cycle."""
    out: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for a, b in arcs:
        out[a].append(b)
        indeg[b] += 1
    queue = deque(i for i in range(n) if indeg[i] == 0)
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return order if len(order) == n else None


def orient_by_flow(
    network: Network, flows: np.ndarray, epsilon: float = DEFAULT_EPSILON
) -> tuple[Network, np.ndarray]:
    """Reorient lines so that every flow is nonnegative.

    Lines carrying less than ``-epsilon`` are reversed and their flow
    negated; flows within ``epsilon`` of zero are clamped to exactly 0 and
    keep their orientation.

    Raises
    ------
    NetworkError
        If the strictly positive flows contain a directed cycle, which cannot
        come from a consistent DC solution.
    """
    flows = np.asarray(flows, dtype=float)
    if flows.shape != (network.M,):
        raise NetworkError(f"expected {network.M} line flows, got shape {flows.shape}")
    lines = []
    oriented = np.empty_like(flows)
    for k, (ln, f) in enumerate(zip(network.lines, flows)):
        if f < -epsilon:
            lines.append(ln.reversed())
            oriented[k] = -f
        else:
            lines.append(ln)
            oriented[k] = f if f > epsilon else 0.0
    net = Network(network.nodes, tuple(lines), network.zone_map)
    arcs = [
        (a, b)
        for a, b, f in zip(net.from_index, net.to_index, oriented)
        if f > 0.0
    ]
    if topological_order(net.N, arcs) is None:
        raise NetworkError("positive flows form a directed cycle")
    return net, oriented


def _parse_node(entry: Mapping) -> Node:
    try:
        return Node(entry["id"], entry["zone"])
    except KeyError as exc:
        raise NetworkError(f"node entry missing field {exc}") from None


def _parse_line(entry: Mapping) -> Line:
    try:
        cap = entry.get("capacity")
        return Line(
            entry["id"],
            entry["from"],
            entry["to"],
            float(entry["reactance"]),
            None if cap is None else float(cap),
        )
    except KeyError as exc:
        raise NetworkError(f"line entry missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise NetworkError(f"bad numeric field in line {entry!r}: {exc}") from None


def network_from_dict(data: Mapping) -> Network:
    if not isinstance(data, Mapping) or "nodes" not in data or "lines" not in data:
        raise NetworkError('network JSON needs "nodes" and "lines" arrays')
    return build_network(
        [_parse_node(e) for e in data["nodes"]], [_parse_line(e) for e in data["lines"]]
    )


def load_network(path: str | Path) -> Network:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NetworkError(f"{path}: invalid JSON ({exc})") from None
    return network_from_dict(data)


def zone_map_from_dict(data: Mapping, network: Network | None = None) -> ZoneMap:
    """Read a zone map stored in the network-file node schema."""
    try:
        entries = data["nodes"]
        assignment = {e["id"]: e["zone"] for e in entries}
    except (KeyError, TypeError) as exc:
        raise NetworkError(f"bad zone map JSON: {exc}") from None
    if network is not None:
        assignment = {network.lookup_node(n): z for n, z in assignment.items()}
    return ZoneMap(assignment)
