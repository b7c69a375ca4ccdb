"""Lossless DC load flow and scenario / flow file readers."""

from __future__ import annotations

import csv
import json
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Mapping

import numpy as np
import scipy.linalg

from .network import Network, NetworkError

BALANCE_TOL = 1e-6
DEFAULT_BASE_MVA = 100.0


class ScenarioError(ValueError):
    """Raised for malformed or unbalanced scenario input."""


@dataclass(frozen=True, eq=False)
class Scenario:
    """Nodal generation and load (MW, both nonnegative) in network node order."""

    gen: np.ndarray
    load: np.ndarray
    label: str = "base"

    def __post_init__(self):
        gen = np.asarray(self.gen, dtype=float)
        load = np.asarray(self.load, dtype=float)
        if gen.shape != load.shape or gen.ndim != 1:
            raise ScenarioError("gen and load must be vectors of equal length")
        if (gen < 0).any() or (load < 0).any():
            raise ScenarioError(f"scenario {self.label!r}: gen and load must be nonnegative")
        object.__setattr__(self, "gen", gen)
        object.__setattr__(self, "load", load)

    @property
    def injection(self) -> np.ndarray:
        return self.gen - self.load

    @property
    def imbalance(self) -> float:
        return float(self.gen.sum() - self.load.sum())

    @classmethod
    def from_mapping(
        cls,
        network: Network,
        gen: Mapping[Hashable, float],
        load: Mapping[Hashable, float],
        label: str = "base",
    ) -> "Scenario":
        g = np.zeros(network.N)
        d = np.zeros(network.N)
        try:
            for key, mw in gen.items():
                g[network.node_index(network.lookup_node(key))] += float(mw)
            for key, mw in load.items():
                d[network.node_index(network.lookup_node(key))] += float(mw)
        except NetworkError as exc:
            raise ScenarioError(f"scenario {label!r}: {exc}") from None
        return cls(g, d, label)


@dataclass(frozen=True, eq=False)
class FlowSolution:
    flows: np.ndarray
    angles: np.ndarray
    slack: Hashable


def solve_dc(
    network: Network,
    scenario: Scenario,
    slack: Hashable | None = None,
    base_mva: float = DEFAULT_BASE_MVA,
) -> FlowSolution:
    """Solve the DC load flow for the scenario's net injections.

    Angles are in radians with the slack node at zero; line flows follow
    ``f_k = base_mva * (theta_from - theta_to) / x_k``. The reduced
    susceptance system is factorized densely.

    Raises
    ------
    ScenarioError
        If generation and load differ by more than ``BALANCE_TOL`` MW or
        the scenario length does not match the network.
    NetworkError
        If the slack node is unknown or the susceptance matrix is singular.
    """
    if scenario.gen.shape != (network.N,):
        raise ScenarioError(
            f"scenario {scenario.label!r} has {scenario.gen.size} nodes, network has {network.N}"
        )
    if abs(scenario.imbalance) > BALANCE_TOL:
        raise ScenarioError(
            f"scenario {scenario.label!r} is unbalanced by {scenario.imbalance:.6g} MW"
        )
    slack = network.node_ids[0] if slack is None else network.lookup_node(slack)
    s = network.node_index(slack)

    b = base_mva / np.array([ln.reactance for ln in network.lines])
    fr, to = network.from_index, network.to_index
    B = np.zeros((network.N, network.N))
    np.add.at(B, (fr, fr), b)
    np.add.at(B, (to, to), b)
    np.add.at(B, (fr, to), -b)
    np.add.at(B, (to, fr), -b)

    keep = np.arange(network.N) != s
    theta = np.zeros(network.N)
    try:
        theta[keep] = scipy.linalg.solve(
            B[np.ix_(keep, keep)], scenario.injection[keep], assume_a="sym"
        )
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NetworkError(f"singular susceptance matrix: {exc}") from None
    flows = b * (theta[fr] - theta[to])
    return FlowSolution(flows=flows, angles=theta, slack=slack)


def kcl_residual(network: Network, scenario: Scenario, flows: np.ndarray) -> np.ndarray:
    """Nodal mismatch ``G^T f - (p^g - p^l)`` in MW."""
    out = np.zeros(network.N)
    np.add.at(out, network.from_index, flows)
    np.add.at(out, network.to_index, -flows)
    return out - scenario.injection


def _scenarios_from_json(network: Network, data) -> list[Scenario]:
    if isinstance(data, Mapping) and "scenarios" in data:
        data = data["scenarios"]
    if isinstance(data, Mapping):
        data = [data]
    scenarios = []
    for n, entry in enumerate(data):
        label = str(entry.get("label", f"s{n}"))
        if "nodes" in entry:
            gen = {e["node"]: e.get("gen", 0.0) for e in entry["nodes"]}
            load = {e["node"]: e.get("load", 0.0) for e in entry["nodes"]}
        else:
            gen, load = entry.get("gen", {}), entry.get("load", {})
        scenarios.append(Scenario.from_mapping(network, gen, load, label))
    return scenarios


def _scenarios_from_csv(network: Network, path: Path) -> list[Scenario]:
    groups: OrderedDict[str, tuple[dict, dict]] = OrderedDict()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"node", "gen", "load"} <= set(reader.fieldnames):
            raise ScenarioError(f"{path}: CSV needs columns node, gen, load (scenario optional)")
        for row in reader:
            label = row.get("scenario") or "base"
            gen, load = groups.setdefault(label, ({}, {}))
            node = row["node"]
            gen[node] = gen.get(node, 0.0) + float(row["gen"] or 0.0)
            load[node] = load.get(node, 0.0) + float(row["load"] or 0.0)
    return [Scenario.from_mapping(network, g, d, label) for label, (g, d) in groups.items()]


def load_scenarios(path: str | Path, network: Network) -> list[Scenario]:
    """Read scenarios from a JSON or CSV file (format chosen by extension)."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".csv":
            scenarios = _scenarios_from_csv(network, path)
        else:
            with open(path) as fh:
                scenarios = _scenarios_from_json(network, json.load(fh))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"{path}: malformed scenario file ({exc})") from None
    if not scenarios:
        raise ScenarioError(f"{path}: no scenarios")
    labels = [s.label for s in scenarios]
    if len(set(labels)) != len(labels):
        raise ScenarioError(f"{path}: duplicate scenario labels")
    return scenarios


def load_flows(path: str | Path, network: Network) -> dict[str, np.ndarray]:
    """Read pre-solved line flows from CSV (columns ``line_id, mw``, optional ``scenario``).

    Returns a mapping from scenario label to the M-vector of flows. Files
    without a scenario column yield a single entry under ``None``.
    """
    out: OrderedDict = OrderedDict()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"line_id", "mw"} <= set(reader.fieldnames):
            raise ScenarioError(f"{path}: flows CSV needs columns line_id, mw")
        for row in reader:
            label = row.get("scenario") or None
            vec = out.setdefault(label, np.full(network.M, np.nan))
            try:
                vec[network.lookup_line(row["line_id"])] = float(row["mw"])
            except (NetworkError, ValueError) as exc:
                raise ScenarioError(f"{path}: {exc}") from None
    for label, vec in out.items():
        if np.isnan(vec).any():
            raise ScenarioError(f"{path}: flows missing for some lines (scenario {label!r})")
    return out


def write_flows(path: str | Path, network: Network, flows_by_label: Mapping[str, np.ndarray]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["scenario", "line_id", "mw"])
        for label, flows in flows_by_label.items():
            for ln, f in zip(network.lines, flows):
                writer.writerow([label, ln.id, repr(float(f))])
