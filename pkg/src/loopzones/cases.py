"""Bundled test systems."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .dcflow import Scenario, load_scenarios
from .network import Network, load_network

_DATA = resources.files(__package__) / "data"


def data_path(name: str) -> Path:
    return Path(str(_DATA / name))


def bialek4() -> tuple[Network, Scenario]:
    """Bialek's four-node tracing example, zones A = {1, 3} and B = {2, 4}.

    Generation of 394.5 MW at node 1 and 112.5 MW at node 2 feeds loads of
    304 MW at node 3 and 203 MW at node 4. The reactances make the DC
    solution carry 59.5, 221.5, 113.5, 172 and 82.5 MW on lines 1 to 5.
    """
    net = load_network(data_path("bialek4_network.json"))
    (scenario,) = load_scenarios(data_path("bialek4_scenario.json"), net)
    return net, scenario
