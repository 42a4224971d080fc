"""Command-line entry point: run scenarios, inspect decisions, sweep breakpoints."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence

from . import __version__, kernels
from .catalog import CatalogError
from .engine import MetricsSample, SweepPoint, breakpoint_sweep, run
from .policy import (
    InfeasibleAllocation,
    Method,
    PolicyError,
    adjusted_throughputs,
    capacity_weights,
    cost_weights,
    solve_allocation,
    target_throughput,
)
from .scenario import (
    BUILTIN_SCENARIOS,
    DemandKind,
    Scenario,
    ScenarioError,
    load_scenario,
)

OUT_ENV = "HETERO_ORCH_OUT"
UNIT_COLUMNS = (
    "weight", "replicas", "available", "arrival_rps",
    "success_rps", "error_rps", "latency_s", "utilization",
)
BREAKPOINT_COLUMNS = ("offered_rps", "served_rps", "latency_s", "utilization")
SWEEP_INCREMENTS = 60


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return f"{value:.6g}"


def metrics_header(ids: Sequence[str]) -> list[str]:
    header = ["t", "mode"]
    for du_id in ids:
        header.extend(f"{du_id}.{col}" for col in UNIT_COLUMNS)
    header.extend(["total_success_rps", "total_error_rps", "cost_usd_cum"])
    return header


def write_metrics_csv(fh: IO[str], ids: Sequence[str], samples: Iterable[MetricsSample]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(metrics_header(ids))
    for s in samples:
        row = [fmt(s.t), s.mode.value]
        for u in s.units:
            row.extend(fmt(getattr(u, col)) for col in UNIT_COLUMNS)
        row.extend([fmt(s.total_success_rps), fmt(s.total_error_rps), fmt(s.cost_usd_cumulative)])
        writer.writerow(row)


def write_breakpoint_csv(fh: IO[str], points: Iterable[SweepPoint]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(BREAKPOINT_COLUMNS)
    for p in points:
        writer.writerow([fmt(getattr(p, col)) for col in BREAKPOINT_COLUMNS])


def _load(args) -> Scenario:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    return scenario


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV)
    if not out:
        raise ScenarioError(f"no output directory: pass --out or set {OUT_ENV}")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_run(args) -> int:
    scenario = _load(args)
    out = _out_dir(args)
    samples, summary = run(scenario)
    with open(out / "metrics.csv", "w", newline="") as fh:
        write_metrics_csv(fh, scenario.catalog.ids, samples)
    with open(out / "summary.json", "w") as fh:
        json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"{scenario.name}: {summary.steps} steps, cost ${summary.total_cost_usd:.4f}, "
          f"error fraction {summary.error_fraction:.4%}, "
          f"{len(summary.mode_switches)} mode switch(es)")
    for sw in summary.mode_switches:
        print(f"  t={sw.t:g}s {sw.from_mode.value} -> {sw.to_mode.value}")
    print(f"wrote {out / 'metrics.csv'} and {out / 'summary.json'}")
    return 0


def _peak_demand(scenario: Scenario) -> float:
    if scenario.demand.kind is DemandKind.PIECEWISE_TABLE:
        return max(r for _, r in scenario.demand.table)
    return scenario.demand.peak_rps


def _print_table(rows: Sequence[Sequence[str]]) -> None:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for r in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())


def cmd_inspect(args) -> int:
    scenario = _load(args)
    catalog = scenario.catalog
    available = scenario.initial_available()
    if args.what == "weights":
        wc = cost_weights(catalog)
        wu = capacity_weights(catalog.ids, [available[i] > 0 for i in catalog.ids])
        rows = [("unit", "cost_per_inference", "w_cost", "w_capacity")]
        for u, a, b in zip(catalog, wc.weights, wu.weights):
            rows.append((u.id, f"{u.cost_per_inference:.5f}", f"{a:.4f}", f"{b:.4f}"))
        _print_table(rows)
    elif args.what == "targets":
        print(f"target_throughput {target_throughput(catalog):.1f}")
        rows = [("unit", "max_throughput", "adjusted_throughput")]
        for u, adj in zip(catalog, adjusted_throughputs(catalog)):
            rows.append((u.id, f"{u.max_throughput:g}", f"{adj:.1f}"))
        _print_table(rows)
    else:
        demand = args.demand if args.demand is not None else _peak_demand(scenario)
        caps = [available[i] for i in catalog.ids]
        print(f"demand {demand:g} RPS")
        rows = [("method", *catalog.ids, "cost_per_hour", "supply_rps")]
        for method in (Method.GREEDY, Method.EXACT):
            plan = solve_allocation(demand, catalog, capacity=caps, method=method)
            rows.append((method.value, *(str(c) for c in plan.counts),
                         f"{plan.total_cost_per_hour:.4f}", f"{plan.supplied_throughput:g}"))
        _print_table(rows)
    return 0


def cmd_breakpoint(args) -> int:
    scenario = _load(args)
    try:
        du = scenario.catalog[args.du]
    except KeyError:
        raise ScenarioError(f"unknown deployment unit {args.du!r}") from None
    out = _out_dir(args)
    points, crossing = breakpoint_sweep(du, SWEEP_INCREMENTS, kappa=scenario.latency_kappa)
    with open(out / "breakpoint.csv", "w", newline="") as fh:
        write_breakpoint_csv(fh, points)
    plateau = max(p.served_rps for p in points)
    print(f"{du.id}: served throughput plateaus at {plateau:g} RPS")
    if crossing is None:
        print(f"{du.id}: no breakpoint found (latency never exceeds {du.breakpoint_latency:g} s)")
    else:
        print(f"{du.id}: breakpoint at offered load {crossing.offered_rps:g} RPS "
              f"(latency {crossing.latency_s:.4g} s > {du.breakpoint_latency:g} s)")
    print(f"wrote {out / 'breakpoint.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetero-orch",
        description="Cost/capacity orchestration simulator for heterogeneous inference pools.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({kernels.BACKEND} kernels)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed (unsigned 64-bit)")
    sub = parser.add_subparsers(dest="command", required=True)
    names = ", ".join(BUILTIN_SCENARIOS)
    scenario_help = f"scenario JSON file or built-in name ({names})"

    p = sub.add_parser("run", help="simulate a scenario, write metrics.csv and summary.json")
    p.add_argument("scenario", help=scenario_help)
    p.add_argument("--out", help=f"output directory (default: ${OUT_ENV})")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("inspect", help="print weights, throughput targets or allocation plans")
    p.add_argument("scenario", help=scenario_help)
    p.add_argument("--what", choices=("weights", "allocation", "targets"), required=True)
    p.add_argument("--demand", type=float, default=None,
                   help="demand for --what allocation (default: scenario peak)")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("breakpoint", help="load-sweep one unit to locate its breaking point")
    p.add_argument("scenario", help=scenario_help)
    p.add_argument("--du", required=True, help="deployment unit id")
    p.add_argument("--out", help=f"output directory (default: ${OUT_ENV})")
    p.set_defaults(func=cmd_breakpoint)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None and not (0 <= args.seed < 2**64):
        parser.error("--seed must be an unsigned 64-bit integer")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ScenarioError, CatalogError, InfeasibleAllocation, PolicyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
