"""Command-line interface.

Subcommands: `run` (seeded episodes with CSV/JSON output), `audit`
(truthfulness / individual-rationality / budget-feasibility property
checks), `bench` (winner-determination scaling benchmark), and
`calibrate-lambda` (improvement-threshold schedule generation).

Exit codes: 0 on success or audit PASS, 1 on audit FAIL, 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .market_model import (
    ScenarioError,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .money import format_money
from .selection import BACKENDS
from .surrogate_fl import TraceOracle


def _parse_seeds(args: argparse.Namespace) -> list[int]:
    if args.seeds:
        try:
            first, last = args.seeds.split("..")
            seeds = list(range(int(first), int(last) + 1))
        except ValueError:
            print(f"aflsim: bad --seeds range {args.seeds!r}, expected A..B", file=sys.stderr)
            raise SystemExit(2)
        if not seeds:
            print(f"aflsim: empty --seeds range {args.seeds!r}", file=sys.stderr)
            raise SystemExit(2)
        return seeds
    return [args.seed]


def _resolve_scenario(name_or_path: str) -> Path:
    path = Path(name_or_path)
    if path.exists():
        return path
    bundled = harness.bundled_scenario_path(name_or_path)
    if bundled.exists():
        return bundled
    raise ScenarioError([f"scenario not found: {name_or_path!r} (no such file or bundled name)"])


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--scenario", default="default",
        help="scenario JSON path or bundled name (default: %(default)s)",
    )
    parser.add_argument("--seed", type=int, default=1, help="single seed (default: 1)")
    parser.add_argument("--seeds", help="inclusive seed range A..B (overrides --seed)")
    parser.add_argument(
        "--backend", choices=sorted(BACKENDS),
        help="winner-determination backend (default: compiled if built)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aflsim",
        description="Budget-feasible reverse-auction FL marketplace simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run seeded episodes and write metrics")
    _add_common(p_run)
    p_run.add_argument(
        "--policy", choices=("gps", "greedy", "rrafl", "oort"), default="gps",
    )
    p_run.add_argument("--out", default="out", help="output directory (default: %(default)s)")
    p_run.add_argument("--trace", action="store_true", help="also write trace.jsonl")
    p_run.add_argument(
        "--oracle-trace", metavar="CSV",
        help="replay an external learning curve (columns: round,dxi_per_unit_s)",
    )

    p_audit = sub.add_parser("audit", help="run a property audit")
    audit_sub = p_audit.add_subparsers(dest="audit_kind", required=True)

    p_truth = audit_sub.add_parser("truthfulness", help="deviation-grid replay audit")
    _add_common(p_truth)
    p_truth.add_argument("--probe-rounds", type=int, default=20)
    p_truth.add_argument("--agents", type=int, default=10)
    p_truth.add_argument(
        "--payment-rule", choices=("pay_as_bid", "uniform_winning_bid"),
        default="pay_as_bid", help=argparse.SUPPRESS,
    )

    for kind, desc in (("ir", "individual rationality"), ("budget", "budget feasibility")):
        p_kind = audit_sub.add_parser(kind, help=f"{desc} audit over seeded runs")
        _add_common(p_kind)
        p_kind.add_argument(
            "--policy", choices=("gps", "greedy", "rrafl", "oort"), default="gps",
        )

    p_bench = sub.add_parser("bench", help="winner-determination scaling benchmark")
    p_bench.add_argument(
        "--sizes", default="1000,10000,100000,1000000",
        help="comma-separated candidate counts (default: %(default)s)",
    )
    p_bench.add_argument("--reps", type=int, default=5)
    p_bench.add_argument(
        "--backends", help="comma-separated backend subset (default: all available)",
    )

    p_cal = sub.add_parser(
        "calibrate-lambda", help="generate the improvement-threshold schedule"
    )
    p_cal.add_argument("--scenario", default="default")
    p_cal.add_argument("--calibration-seeds", type=int, default=30)
    p_cal.add_argument("--cohort-size", type=int)
    p_cal.add_argument("--out", default="lambda.json", help="schedule output file")
    p_cal.add_argument(
        "--apply", metavar="SCENARIO_OUT",
        help="also write a copy of the scenario with the schedule baked in",
    )
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    scenario_path = _resolve_scenario(args.scenario)
    seeds = _parse_seeds(args)
    if args.oracle_trace:
        scenario = load_scenario(scenario_path)
        results = []
        for seed in seeds:
            oracle = TraceOracle.from_csv(
                args.oracle_trace,
                n_owners=len(scenario.owners),
                xi_max=scenario.oracle.xi_max,
                initial_perf=scenario.oracle.initial_perf,
            )
            results.append(
                harness.run_episode(
                    scenario, args.policy, seed, backend=args.backend, oracle=oracle
                )
            )
        harness.write_outputs(results, args.out, trace=args.trace)
    else:
        results = harness.run(
            scenario_path, args.policy, seeds, args.out,
            trace=args.trace, backend=args.backend,
        )
    for result in results:
        print(
            f"seed {result.seed}: {result.rounds_executed} rounds, "
            f"final_perf {result.final_perf:.4f}, "
            f"total_utility {format_money(result.total_utility)}, "
            f"total_cost {format_money(result.total_cost)}"
        )
    print(f"wrote {Path(args.out) / 'metrics.csv'}")
    return 0


def _cmd_audit_truthfulness(args: argparse.Namespace) -> int:
    scenario = load_scenario(_resolve_scenario(args.scenario))
    failed = False
    for seed in _parse_seeds(args):
        report = harness.audit_truthfulness(
            scenario, seed,
            probe_rounds=args.probe_rounds,
            agents_per_round=args.agents,
            payment_rule=args.payment_rule,
            backend=args.backend,
        )
        status = "PASS" if report["pass"] else "FAIL"
        print(f"truthfulness seed {seed}: {status} ({report['probes']} probes)")
        for violation in report["violations"][:5]:
            print(f"  profitable deviation: {violation}")
        failed = failed or not report["pass"]
    return 1 if failed else 0


def _cmd_audit_runs(args: argparse.Namespace, checks: tuple[str, ...]) -> int:
    scenario = load_scenario(_resolve_scenario(args.scenario))
    total_budget = scenario.federation.total_budget
    failed = False
    for seed in _parse_seeds(args):
        result = harness.run_episode(scenario, args.policy, seed, backend=args.backend)
        report = harness.audit_ir_and_budget(result, total_budget, checks=checks)
        status = "PASS" if report["pass"] else "FAIL"
        print(f"{'/'.join(checks)} seed {seed} policy {args.policy}: {status}")
        for violation in report["violations"]:
            print(f"  {violation}")
        failed = failed or not report["pass"]
    return 1 if failed else 0


def _cmd_bench(args: argparse.Namespace) -> int:
    sizes = tuple(int(s) for s in args.sizes.split(","))
    backends = tuple(args.backends.split(",")) if args.backends else None
    report = harness.bench_selection(sizes, repetitions=args.reps, backends=backends)
    for backend, data in report["backends"].items():
        print(f"backend {backend}: slope {data['slope']:.3f}")
        for n, seconds in sorted(data["median_seconds"].items()):
            print(f"  n={n:>8}: {seconds * 1e3:9.3f} ms")
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    scenario = load_scenario(_resolve_scenario(args.scenario))
    schedule = harness.calibrate_lambda(
        scenario, n_seeds=args.calibration_seeds, cohort_size=args.cohort_size
    )
    Path(args.out).write_text(
        json.dumps({"improvement_thresholds": schedule}, indent=2) + "\n"
    )
    print(f"wrote {args.out} ({len(schedule)} thresholds)")
    if args.apply:
        doc = scenario_to_dict(scenario)
        doc["federation"]["improvement_thresholds"] = schedule
        save_scenario(scenario_from_dict(doc), args.apply)
        print(f"wrote {args.apply}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "audit":
            if args.audit_kind == "truthfulness":
                return _cmd_audit_truthfulness(args)
            if args.audit_kind == "ir":
                return _cmd_audit_runs(args, ("ir",))
            return _cmd_audit_runs(args, ("budget",))
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_calibrate(args)
    except (ScenarioError, OSError, ValueError) as exc:
        print(f"aflsim: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
