"""Multi-scenario orchestration: solve, trace, decompose, average, rank, split."""

from __future__ import annotations

import csv
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Mapping, Sequence

import numpy as np

from .classify import DecompositionTable, ZoneRank, decompose, loop_injections, rank_zones
from .dcflow import Scenario, ScenarioError, load_flows, load_scenarios, solve_dc
from .network import DEFAULT_EPSILON, Network, ZoneMap, id_sort_key, incidence, load_network
from .splitting import NoLoopFlows, SplitResult, select_target_zone, split_zone
from .tracing import TraceResult, exchange_matrix, trace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    epsilon: float = DEFAULT_EPSILON
    mode: str = "absolute"
    slack: Hashable | None = None
    output_dir: Path | None = None
    emit_debug_matrices: bool = False
    split_names: tuple | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    network: Network
    scenario: Scenario
    flows: np.ndarray
    trace: TraceResult
    table: DecompositionTable
    p_lf: np.ndarray

    @property
    def label(self) -> str:
        return self.scenario.label


@dataclass(frozen=True, eq=False)
class AveragedResult:
    table: DecompositionTable
    p_lf: np.ndarray
    per_scenario: list[ScenarioResult]
    scenario_rankings: dict = field(default_factory=dict)


def evaluate_scenario(
    network: Network,
    scenario: Scenario,
    flows: np.ndarray | None = None,
    zone_map: ZoneMap | None = None,
    config: PipelineConfig = PipelineConfig(),
) -> ScenarioResult:
    """Trace and decompose one scenario; solves the DC flow unless ``flows`` is given."""
    if flows is None:
        flows = solve_dc(network, scenario, config.slack).flows
    flows = np.asarray(flows, dtype=float)
    tr = trace(network, flows, scenario, config.epsilon)
    table = decompose(tr, zone_map or network.zone_map)
    p_lf = loop_injections(incidence(tr.network), table.lf_mw)
    return ScenarioResult(network, scenario, flows, tr, table, p_lf)


def redecompose(result: ScenarioResult, zone_map: ZoneMap) -> ScenarioResult:
    """Re-classify an already traced scenario under a different zone map."""
    table = decompose(result.trace, zone_map)
    p_lf = loop_injections(incidence(result.trace.network), table.lf_mw)
    return ScenarioResult(result.network, result.scenario, result.flows, result.trace, table, p_lf)


def _same_network(a: Network, b: Network) -> bool:
    return a is b or (a.node_ids == b.node_ids and a.line_ids == b.line_ids)


def average_decomposition(
    results: Sequence[ScenarioResult], mode: str = "absolute"
) -> AveragedResult:
    """Arithmetic mean of per-scenario decompositions and loop injections.

    Each scenario is decomposed under its own flow orientation first; only
    the resulting magnitudes and nodal injections are averaged.
    """
    if not results:
        raise ValueError("need at least one scenario result")
    ref = results[0].network
    for r in results[1:]:
        if not _same_network(ref, r.network):
            raise ValueError(f"scenario {r.label!r} was evaluated on a different network")
    tables = [r.table for r in results]
    zones = sorted({z for t in tables for z in t.lf_by_zone}, key=id_sort_key)
    zero = np.zeros(len(ref.lines))
    mean = DecompositionTable(
        line_ids=list(tables[0].line_ids),
        flows=np.mean([t.flows for t in tables], axis=0),
        in_mw=np.mean([t.in_mw for t in tables], axis=0),
        ie_mw=np.mean([t.ie_mw for t in tables], axis=0),
        tr_mw=np.mean([t.tr_mw for t in tables], axis=0),
        lf_mw=np.mean([t.lf_mw for t in tables], axis=0),
        lf_by_zone={z: np.mean([t.lf_by_zone.get(z, zero) for t in tables], axis=0) for z in zones},
        capacity=tables[0].capacity,
    )
    p_lf = np.mean([r.p_lf for r in results], axis=0)
    rankings = {r.label: rank_zones(r.table, None, mode) for r in results}
    return AveragedResult(mean, p_lf, list(results), rankings)


@dataclass(frozen=True, eq=False)
class PipelineReport:
    network: Network
    pre: AveragedResult
    ranking: list[ZoneRank]
    split: SplitResult | None
    post: AveragedResult | None
    status: str

    @property
    def total_lf_pre(self) -> float:
        return self.pre.table.total_lf

    @property
    def total_lf_post(self) -> float | None:
        return None if self.post is None else self.post.table.total_lf


def evaluate_all(
    network: Network,
    scenarios: Sequence[Scenario],
    flows: Mapping | None = None,
    config: PipelineConfig = PipelineConfig(),
) -> list[ScenarioResult]:
    """Evaluate scenarios, concurrently when ``config.workers > 1``; output keeps input order."""
    flow_vectors = [_flows_for(s, flows) for s in scenarios]

    def job(args):
        scenario, f = args
        return evaluate_scenario(network, scenario, f, None, config)

    if config.workers == 1:
        return [job(a) for a in zip(scenarios, flow_vectors)]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(job, zip(scenarios, flow_vectors)))


def _flows_for(scenario: Scenario, flows: Mapping | None):
    if flows is None:
        return None
    if scenario.label in flows:
        return flows[scenario.label]
    if None in flows and len(flows) == 1:
        return flows[None]
    raise ScenarioError(f"flows file has no entry for scenario {scenario.label!r}")


def optimize_zones(
    network: Network,
    scenarios: Sequence[Scenario],
    flows: Mapping | None = None,
    config: PipelineConfig = PipelineConfig(),
) -> PipelineReport:
    """One enhancement step: decompose, average, rank, split the worst zone, re-decompose."""
    results = evaluate_all(network, scenarios, flows, config)
    pre = average_decomposition(results, config.mode)
    ranking = rank_zones(pre.table, network.zone_map, config.mode)
    try:
        target = select_target_zone(ranking)
    except NoLoopFlows:
        logger.info("no loop flows; zonal configuration left unchanged")
        return PipelineReport(network, pre, ranking, None, None, "converged")
    split = split_zone(network, network.zone_map, target, pre.p_lf, config.split_names)
    post = average_decomposition([redecompose(r, split.new_zone_map) for r in results], config.mode)
    logger.info(
        "split zone %s: total LF %.2f -> %.2f MW", target, pre.table.total_lf, post.table.total_lf
    )
    return PipelineReport(network, pre, ranking, split, post, "split")


def run_pipeline(
    network_file: str | Path,
    scenario_file: str | Path,
    config: PipelineConfig,
    flows_file: str | Path | None = None,
) -> PipelineReport:
    """Read inputs, run :func:`optimize_zones` and write the report bundle."""
    network = load_network(network_file)
    scenarios = load_scenarios(scenario_file, network)
    flows = load_flows(flows_file, network) if flows_file is not None else None
    report = optimize_zones(network, scenarios, flows, config)
    if config.output_dir is not None:
        write_report(report, config.output_dir, config.emit_debug_matrices)
    return report


# ---------------------------------------------------------------- writers


def _fmt2(v: float) -> str:
    # avoids "-0.00"
    return f"{round(float(v), 2) + 0.0:.2f}"


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_json(path: Path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, default=_json_default)
        fh.write("\n")


def write_decomposition_csv(path: Path, table: DecompositionTable) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["line_id", "IN", "IE", "TR", "LF"])
        for k, lid in enumerate(table.line_ids):
            writer.writerow(
                [lid] + [_fmt2(c[k]) for c in (table.in_mw, table.ie_mw, table.tr_mw, table.lf_mw)]
            )


def averaged_json(avg: AveragedResult, network: Network) -> dict:
    return {
        "mean": avg.table.to_json_dict(),
        "p_lf": {str(n): float(v) for n, v in zip(network.node_ids, avg.p_lf)},
        "scenarios": {r.label: r.table.to_json_dict() for r in avg.per_scenario},
    }


def write_zone_ranking(path: Path, ranking: Sequence[ZoneRank]) -> None:
    write_json(path, [r.to_json_dict() for r in ranking])


def write_p_lf_csv(path: Path, network: Network, p_lf: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_id", "p_lf"])
        for n, v in zip(network.node_ids, p_lf):
            writer.writerow([n, repr(float(v) + 0.0)])


def _matrix_csv(path: Path, matrix: np.ndarray, row_ids, col_ids) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([""] + list(col_ids))
        for rid, row in zip(row_ids, matrix):
            writer.writerow([rid] + [repr(float(v) + 0.0) for v in row])


def safe_label(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", str(label))


def write_debug_matrices(out: Path, result: ScenarioResult) -> None:
    """Dump F, G2T, L2T and each line's X matrix for one scenario."""
    tr = result.trace
    nodes = tr.network.node_ids
    lines = tr.network.line_ids
    out.mkdir(parents=True, exist_ok=True)
    _matrix_csv(out / "F.csv", tr.F, nodes, nodes)
    _matrix_csv(out / "G2T.csv", tr.G2T, lines, nodes)
    _matrix_csv(out / "L2T.csv", tr.L2T, lines, nodes)
    for k, lid in enumerate(lines):
        X = exchange_matrix(k, tr.G2T, tr.L2T, tr.flows, tr.epsilon)
        _matrix_csv(out / f"X_{safe_label(lid)}.csv", X, nodes, nodes)


def write_report(report: PipelineReport, out_dir: str | Path, debug: bool = False) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    net = report.network
    write_decomposition_csv(out / "decomposition_pre.csv", report.pre.table)
    write_json(out / "decomposition_pre.json", averaged_json(report.pre, net))
    write_zone_ranking(out / "zone_ranking.json", report.ranking)
    write_json(
        out / "zone_ranking_by_scenario.json",
        {label: [r.to_json_dict() for r in rk] for label, rk in report.pre.scenario_rankings.items()},
    )
    write_p_lf_csv(out / "p_lf.csv", net, report.pre.p_lf)
    summary = {
        "status": report.status,
        "total_lf_pre_mw": report.total_lf_pre,
        "total_lf_post_mw": report.total_lf_post,
        "target_zone": None if report.split is None else report.split.target_zone,
        "scenarios": [r.label for r in report.pre.per_scenario],
    }
    if report.split is not None:
        write_json(out / "zone_map_new.json", report.split.new_zone_map.to_json_dict())
        write_json(out / "merge_trace.json", report.split.to_json_dict())
        write_decomposition_csv(out / "decomposition_post.csv", report.post.table)
        write_json(out / "decomposition_post.json", averaged_json(report.post, net))
    write_json(out / "summary.json", summary)
    if debug:
        for r in report.pre.per_scenario:
            write_debug_matrices(out / "debug" / safe_label(r.label), r)
