"""Command-line entry point: ``loopzones <subcommand> --network ... --scenarios ...``.

Exit status: 0 on success, 2 for invalid input, 3 when there are no loop
flows left to remove.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .classify import rank_zones
from .dcflow import ScenarioError, load_flows, load_scenarios, solve_dc, write_flows
from .network import DEFAULT_EPSILON, NetworkError, load_network
from .pipeline import (
    PipelineConfig,
    average_decomposition,
    evaluate_all,
    optimize_zones,
    write_debug_matrices,
    write_decomposition_csv,
    write_json,
    write_p_lf_csv,
    write_report,
    write_zone_ranking,
    averaged_json,
    safe_label,
)
from .splitting import NoLoopFlows, SplitError, select_target_zone, split_zone
from .tracing import TracingError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_LOOP_FLOWS = 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--network", required=True, type=Path, help="network JSON file")
    common.add_argument("--scenarios", required=True, type=Path, help="scenario JSON or CSV file")
    common.add_argument("--flows", type=Path, help="pre-solved line flows CSV (skips the DC solve)")
    common.add_argument("--mode", choices=["abs", "rel"], default="abs", help="zone ranking mode")
    common.add_argument("--slack", help="slack node id (default: first node)")
    common.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="zero-flow tolerance, MW")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--debug-matrices", action="store_true", help="dump F, G2T, L2T and X matrices")
    common.add_argument("--split-names", help="comma-separated names for the source and sink sub-zones")
    common.add_argument("--workers", type=int, default=1, help="scenarios evaluated in parallel")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="loopzones", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("solve", "solve the DC load flow and write flows.csv"),
        ("trace", "trace flows and dump tracing matrices"),
        ("decompose", "write the averaged IN/IE/TR/LF decomposition"),
        ("rank", "rank zones by the loop flow they cause"),
        ("split", "split the worst zone in two"),
        ("pipeline", "run every stage and write the full report"),
    ]:
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def _config(args) -> PipelineConfig:
    names = None
    if args.split_names:
        parts = [p.strip() for p in args.split_names.split(",")]
        if len(parts) != 2:
            raise ValueError("--split-names needs exactly two comma-separated names")
        names = tuple(parts)
    return PipelineConfig(
        epsilon=args.epsilon,
        mode="absolute" if args.mode == "abs" else "relative",
        slack=args.slack,
        output_dir=args.out,
        emit_debug_matrices=args.debug_matrices,
        split_names=names,
        workers=args.workers,
    )


def _run(args) -> int:
    config = _config(args)
    network = load_network(args.network)
    scenarios = load_scenarios(args.scenarios, network)
    flows = load_flows(args.flows, network) if args.flows else None
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    if args.command == "solve":
        solved = {s.label: solve_dc(network, s, config.slack).flows for s in scenarios}
        write_flows(out / "flows.csv", network, solved)
        return EXIT_OK

    if args.command == "pipeline":
        report = optimize_zones(network, scenarios, flows, config)
        write_report(report, out, config.emit_debug_matrices)
        print(f"total LF before: {report.total_lf_pre:.2f} MW")
        if report.split is None:
            print("no loop flows: zonal configuration unchanged")
            return EXIT_NO_LOOP_FLOWS
        print(f"split zone {report.split.target_zone!r}; total LF after: {report.total_lf_post:.2f} MW")
        return EXIT_OK

    results = evaluate_all(network, scenarios, flows, config)
    if args.command == "trace" or config.emit_debug_matrices:
        for r in results:
            write_debug_matrices(out / "debug" / safe_label(r.label), r)
        if args.command == "trace":
            return EXIT_OK

    avg = average_decomposition(results, config.mode)
    if args.command == "decompose":
        write_decomposition_csv(out / "decomposition_pre.csv", avg.table)
        write_json(out / "decomposition_pre.json", averaged_json(avg, network))
        return EXIT_OK

    ranking = rank_zones(avg.table, network.zone_map, config.mode)
    if args.command == "rank":
        write_zone_ranking(out / "zone_ranking.json", ranking)
        for r in ranking:
            print(f"{r.zone}\t{r.lf_total_mw:.2f}")
        return EXIT_OK

    # split
    write_p_lf_csv(out / "p_lf.csv", network, avg.p_lf)
    try:
        target = select_target_zone(ranking)
    except NoLoopFlows as exc:
        print(exc)
        return EXIT_NO_LOOP_FLOWS
    split = split_zone(network, network.zone_map, target, avg.p_lf, config.split_names)
    write_json(out / "zone_map_new.json", split.new_zone_map.to_json_dict())
    write_json(out / "merge_trace.json", split.to_json_dict())
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return _run(args)
    except (NetworkError, ScenarioError, TracingError, SplitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
