"""Command-line entry points.

Machine-first: every subcommand prints JSON to stdout (``--pretty`` switches
the report-style commands to small tables), so scripts, tests, and the
explorer service speak the same schemas.

Exit codes: 0 success, 1 violated verification, 2 usage error, 3 infeasible
optimization.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .information import check_calibration, information_report
from .optimize import OptimizationSpec, SpecError, solve_optimization
from .policy import ImpactParams, sweep_curves
from .population import ALL, Group, dump_population, load_population
from .refinement import SampleBudget, merge_from_samples, merge_oracle, parse_sample_stream
from .suites import run_suite
from .synth import paper_instances

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


def _usage_error(message: str) -> SystemExit:
    print(f"fairinfo: {message}", file=sys.stderr)
    return SystemExit(EXIT_USAGE)


def _load(path: str):
    try:
        return load_population(Path(path).read_bytes())
    except FileNotFoundError:
        raise _usage_error(f"population file not found: {path}")


def _pick_predictor(predictors, name: str):
    if name not in predictors:
        raise _usage_error(
            f"predictor {name!r} not in file (available: {sorted(predictors)})"
        )
    return predictors[name]


def _emit(doc, pretty_rows=None, pretty: bool = False) -> None:
    if pretty and pretty_rows is not None:
        widths = [max(len(str(r[i])) for r in pretty_rows) for i in range(len(pretty_rows[0]))]
        for row in pretty_rows:
            print("  ".join(str(v).ljust(w) for v, w in zip(row, widths)))
    else:
        print(json.dumps(doc, indent=2))


def cmd_audit(args) -> int:
    pop, predictors = _load(args.population)
    z = _pick_predictor(predictors, args.predictor)
    scopes = [args.group] if args.group else [g.value for g in pop.groups] + [ALL]
    report = {}
    for scope in scopes:
        cal = check_calibration(pop, z, scope, tolerance=args.tolerance)
        doc = {"calibration": cal.to_dict()}
        if cal.is_calibrated:
            doc["information"] = information_report(pop, z, scope).to_dict()
        report[scope] = doc
    rows = [("scope", "calibrated", "max_dev", "content", "entropic")]
    for scope, doc in report.items():
        info = doc.get("information", {})
        rows.append(
            (
                scope,
                doc["calibration"]["is_calibrated"],
                f"{doc['calibration']['max_deviation']:.3e}",
                f"{info.get('content', float('nan')):.6f}",
                f"{info.get('entropic_content', float('nan')):.6f}",
            )
        )
    _emit(report, rows, args.pretty)
    return EXIT_OK


def cmd_merge(args) -> int:
    pop, predictors = _load(args.population)
    z = _pick_predictor(predictors, args.z)
    q = _pick_predictor(predictors, args.q)
    if args.samples:
        lines = Path(args.samples).read_text().splitlines()
        counts = parse_sample_stream(lines)
        total = sum(n for n, _ in counts.values())
        budget = SampleBudget(alpha=args.alpha, gamma=args.gamma, delta=args.delta, m=total)
        report = merge_from_samples(z, q, counts, budget)
    else:
        scopes = (Group.A, Group.B) if args.per_group else ALL
        report = merge_oracle(pop, z, q, scopes=scopes)
    if args.out:
        merged = dict(predictors)
        merged[report.result.name] = report.result
        Path(args.out).write_text(dump_population(pop, merged))
    _emit(report.to_dict(), pretty=args.pretty)
    return EXIT_OK


def _spec_from_args(args) -> OptimizationSpec:
    return OptimizationSpec(
        objective=args.objective,
        fairness_metric=args.h,
        eps=args.eps,
        t_i=args.t_impact,
        t_u=args.t_utility,
        impact_params=ImpactParams(args.tau_u, args.tau_l),
        lambda_u=args.lambda_u,
        lambda_i=args.lambda_i,
        lambda_beta=args.lambda_b,
    )


def cmd_optimize(args) -> int:
    pop, predictors = _load(args.population)
    z = _pick_predictor(predictors, args.predictor)
    try:
        spec = _spec_from_args(args)
        result = solve_optimization(pop, z, spec)
    except SpecError as exc:
        print(json.dumps({"error": str(exc)}))
        return EXIT_USAGE
    _emit(result.to_dict(), pretty=args.pretty)
    return EXIT_OK if result.status == "optimal" else EXIT_INFEASIBLE


def cmd_sweep(args) -> int:
    pop, predictors = _load(args.population)
    z = _pick_predictor(predictors, args.predictor)
    rows = sweep_curves(pop, z, args.group, points=args.points)
    print("beta,tpr,fpr,ppv")
    for row in rows:
        cells = [row.beta, row.tpr, row.fpr, row.ppv]
        print(",".join("" if v is None else format(float(v), ".12g") for v in cells))
    return EXIT_OK


def cmd_verify(args) -> int:
    result = run_suite(args.suite, seeds=args.seeds, base_seed=args.base_seed)
    _emit(result.to_dict(), pretty=args.pretty)
    return EXIT_OK if result.ok else EXIT_VIOLATION


def cmd_demo(args) -> int:
    instances = paper_instances()
    pop, predictors = instances[args.name]
    text = dump_population(pop, predictors)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve_forever

    serve_forever(host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairinfo",
        description="Audit, refine, and optimize calibrated risk predictors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="calibration and information reports per group")
    p.add_argument("population")
    p.add_argument("--predictor", required=True)
    p.add_argument("--group", choices=["A", "B", ALL])
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(fn=cmd_audit)

    p = sub.add_parser("merge", help="merge two predictors into a common refinement")
    p.add_argument("population")
    p.add_argument("--z", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--per-group", action="store_true")
    p.add_argument("--out", help="write the population plus merged predictor here")
    p.add_argument("--samples", help="cell_id,y stream file: estimate from outcomes")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(fn=cmd_merge)

    p = sub.add_parser("optimize", help="solve a fairness-constrained selection program")
    p.add_argument("population")
    p.add_argument("--predictor", required=True)
    p.add_argument("--objective", required=True, choices=["utility", "disparity", "impact", "combo"])
    p.add_argument("--h", default="beta", choices=["beta", "tpr", "fpr"])
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--t-impact", type=float, default=-1.0)
    p.add_argument("--t-utility", type=float, default=-1.0)
    p.add_argument("--tau-u", type=float, default=0.5)
    p.add_argument("--tau-l", type=float, default=0.5)
    p.add_argument("--lambda-u", type=float, default=1.0)
    p.add_argument("--lambda-i", type=float, default=0.0)
    p.add_argument("--lambda-b", type=float, default=0.0)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("sweep", help="emit per-group threshold curves as CSV")
    p.add_argument("population")
    p.add_argument("--predictor", required=True)
    p.add_argument("--group", required=True, choices=["A", "B"])
    p.add_argument("--points", type=int, default=1001)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("verify", help="run a seeded verification suite")
    p.add_argument("--suite", required=True,
                   choices=["improve", "improv", "identities", "merge", "samples", "sweep", "cost"])
    p.add_argument("--seeds", type=int)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("demo", help="emit a built-in instance in the population format")
    p.add_argument("--name", required=True, choices=["figure1", "caution", "groupwise"])
    p.add_argument("--out")
    p.set_defaults(fn=cmd_demo)

    p = sub.add_parser("serve", help="start the HTTP analysis service")
    p.add_argument("--port", type=int, default=8151)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit:
        raise
    except (ValueError, KeyError) as exc:
        print(json.dumps({"error": str(exc)}))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
