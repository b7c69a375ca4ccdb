"""Zonal classification of traced flow components.

Each component ``X^k[i, j]`` (load i, generator j, line k) falls in exactly
one category, decided from the zones of i, j and the two line endpoints:

* ``IN``  all four zones equal;
* ``IE``  i and j in different zones, both endpoints inside those two zones;
* ``TR``  i and j in different zones, some endpoint in a third zone;
* ``LF``  i and j in the same zone, some endpoint outside it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Hashable

import numpy as np

from .network import IncidenceMatrices, Line, Network, ZoneMap, id_sort_key
from .tracing import TraceResult


class Category(str, enum.Enum):
    IN = "IN"
    IE = "IE"
    TR = "TR"
    LF = "LF"


CATEGORIES = (Category.IN, Category.IE, Category.TR, Category.LF)


def classify(load_node: Hashable, gen_node: Hashable, line: Line, zone_map: ZoneMap) -> Category:
    zi, zj = zone_map[load_node], zone_map[gen_node]
    ends = (zone_map[line.from_node], zone_map[line.to_node])
    if zi == zj:
        return Category.IN if all(z == zi for z in ends) else Category.LF
    if all(z in (zi, zj) for z in ends):
        return Category.IE
    return Category.TR


def category_masks(zone_codes: np.ndarray, end1: int, end2: int) -> dict[Category, np.ndarray]:
    """Boolean ``N x N`` masks (rows = load, cols = generator) for one line."""
    zi = zone_codes[:, None]
    zj = zone_codes[None, :]
    same = zi == zj
    inside = ((zi == end1) | (zj == end1)) & ((zi == end2) | (zj == end2))
    internal_line = (zi == end1) & (zi == end2)
    return {
        Category.IN: same & internal_line,
        Category.LF: same & ~internal_line,
        Category.IE: ~same & inside,
        Category.TR: ~same & ~inside,
    }


@dataclass(frozen=True, eq=False)
class DecompositionTable:
    """Per-line category totals (MW) plus loop flow broken down by culprit zone."""

    line_ids: list
    flows: np.ndarray
    in_mw: np.ndarray
    ie_mw: np.ndarray
    tr_mw: np.ndarray
    lf_mw: np.ndarray
    lf_by_zone: dict
    capacity: np.ndarray

    def column(self, cat: Category | str) -> np.ndarray:
        return {"IN": self.in_mw, "IE": self.ie_mw, "TR": self.tr_mw, "LF": self.lf_mw}[Category(cat).value]

    def as_array(self) -> np.ndarray:
        """``M x 4`` array with columns IN, IE, TR, LF."""
        return np.column_stack([self.in_mw, self.ie_mw, self.tr_mw, self.lf_mw])

    @property
    def total_lf(self) -> float:
        return float(self.lf_mw.sum())

    def to_json_dict(self) -> dict:
        rows = []
        for k, lid in enumerate(self.line_ids):
            rows.append(
                {
                    "line_id": lid,
                    "flow": float(self.flows[k]),
                    "IN": float(self.in_mw[k]),
                    "IE": float(self.ie_mw[k]),
                    "TR": float(self.tr_mw[k]),
                    "LF": float(self.lf_mw[k]),
                    "LF_by_zone": {str(z): float(v[k]) for z, v in self.lf_by_zone.items()},
                }
            )
        return {"lines": rows, "total_lf": self.total_lf}


def decompose_line(
    k: int, X: np.ndarray, network: Network, zone_map: ZoneMap
) -> tuple[dict[Category, float], dict]:
    """Split one line's exchange matrix into category totals.

    Returns ``(totals, lf_by_zone)``; loop-flow components are charged to
    the zone shared by their load and generator.
    """
    zones = zone_map.sorted_zones()
    code = {z: c for c, z in enumerate(zones)}
    zc = np.array([code[zone_map[n]] for n in network.node_ids])
    line = network.lines[k]
    masks = category_masks(zc, code[zone_map[line.from_node]], code[zone_map[line.to_node]])
    totals = {cat: float(X[m].sum()) for cat, m in masks.items()}
    lf = masks[Category.LF]
    by_zone = {z: float(X[lf & (zc[:, None] == code[z])].sum()) for z in zones}
    return totals, by_zone


def decompose(trace: TraceResult, zone_map: ZoneMap | None = None) -> DecompositionTable:
    """Decompose every line of a traced scenario (zones default to the network's)."""
    net = trace.network
    zone_map = net.zone_map if zone_map is None else zone_map
    M = net.M
    cols = {cat: np.zeros(M) for cat in CATEGORIES}
    by_zone = {z: np.zeros(M) for z in zone_map.sorted_zones()}
    for k in range(M):
        totals, lfz = decompose_line(k, trace.exchange(k), net, zone_map)
        for cat, v in totals.items():
            cols[cat][k] = v
        for z, v in lfz.items():
            by_zone[z][k] = v
    capacity = np.array([np.nan if ln.capacity is None else ln.capacity for ln in net.lines])
    return DecompositionTable(
        line_ids=net.line_ids,
        flows=trace.flows.copy(),
        in_mw=cols[Category.IN],
        ie_mw=cols[Category.IE],
        tr_mw=cols[Category.TR],
        lf_mw=cols[Category.LF],
        lf_by_zone=by_zone,
        capacity=capacity,
    )


def loop_injections(inc: IncidenceMatrices, lf_vector: np.ndarray) -> np.ndarray:
    """Net nodal injections ``G^T f_LF`` that reproduce the loop-flow pattern.

    ``inc`` must describe the flow-oriented network the LF magnitudes refer to.
    """
    return inc.G.T @ np.asarray(lf_vector, dtype=float)


@dataclass(frozen=True)
class ZoneRank:
    zone: Hashable
    lf_total_mw: float
    mode: str

    def to_json_dict(self) -> dict:
        return {"zone": self.zone, "lf_total_mw": self.lf_total_mw, "mode": self.mode}


_MODES = {"abs": "absolute", "absolute": "absolute", "rel": "relative", "relative": "relative"}


def rank_zones(
    table: DecompositionTable, zone_map: ZoneMap | None = None, mode: str = "absolute"
) -> list[ZoneRank]:
    """Order zones by the loop flow their internal transactions cause.

    ``absolute`` sums MW; ``relative`` sums MW divided by line capacity and
    skips lines without one. Ties go to the lower zone id.
    """
    try:
        mode = _MODES[mode]
    except KeyError:
        raise ValueError(f"unknown ranking mode {mode!r}") from None
    zones = zone_map.sorted_zones() if zone_map is not None else sorted(table.lf_by_zone, key=id_sort_key)
    if mode == "relative":
        has_cap = ~np.isnan(table.capacity)
        if not has_cap.any():
            raise ValueError("relative ranking needs at least one line capacity")
        weight = np.where(has_cap, 1.0 / np.where(has_cap, table.capacity, 1.0), 0.0)
    else:
        weight = np.ones(len(table.line_ids))
    totals = {}
    for z in zones:
        lf = table.lf_by_zone.get(z)
        totals[z] = 0.0 if lf is None else float(lf @ weight)
    ordered = sorted(zones, key=lambda z: (-round(totals[z], 9), id_sort_key(z)))
    return [ZoneRank(z, totals[z], mode) for z in ordered]
