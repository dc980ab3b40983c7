"""Command-line interface: solve, validate, render, gen, bench.

Exit codes: 0 success, 1 input or usage error, 2 a plan or report was produced
but it leaves orders unserved or rules violated.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .fixtures import FIXTURE_NAMES, generate_fixture
from .model import InvalidInstanceError
from .planner import MODE_CONSTRAINT, MODE_FILTER, OrchestratorConfig, plan as run_plan
from .solvers import SizeLimitError, SolverConfig
from .storage import FormatError, load_instance, load_plan, save_instance, save_plan
from .svg import render_svg
from .validate import validate_plan

DEFAULT_SEED = 7


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", default="auto",
                   choices=["auto", "exact", "anneal", "external-stub"])
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--time-limit", type=float, default=5.0,
                   help="per-route solver wall limit in seconds")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--mobility-mode", default=MODE_FILTER,
                   choices=[MODE_FILTER, MODE_CONSTRAINT])
    p.add_argument("--no-rentals", action="store_true",
                   help="never select rentable vehicles")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fleetroute")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="plan routes for an instance file")
    p.add_argument("instance")
    p.add_argument("--out", help="plan file path (default: <instance>.plan.json)")
    p.add_argument("--report", help="report file path (default: <instance>.report.json)")
    p.add_argument("-v", "--verbose", action="store_true")
    _solver_flags(p)

    p = sub.add_parser("validate", help="check a plan file against its instance")
    p.add_argument("instance")
    p.add_argument("plan")

    p = sub.add_parser("render", help="draw an instance + plan as SVG")
    p.add_argument("instance")
    p.add_argument("plan")
    p.add_argument("--out", required=True)

    p = sub.add_parser("gen", help="write one of the demonstration instances")
    p.add_argument("name", choices=list(FIXTURE_NAMES))
    p.add_argument("--variant", default="A", choices=["A", "B"])
    p.add_argument("--out", help="output path (default: <name>.json)")

    p = sub.add_parser("bench", help="solve fixtures and tabulate results")
    p.add_argument("--fixtures", default=",".join(FIXTURE_NAMES),
                   help="comma-separated fixture names")
    p.add_argument("--backends", default="auto",
                   help="comma-separated backends to run")
    p.add_argument("--out", help="write rows as JSON")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--time-limit", type=float, default=30.0)
    p.add_argument("--threads", type=int, default=1)
    return parser


def _configs(args) -> OrchestratorConfig:
    solver = SolverConfig(
        backend=args.backend,
        seed=args.seed,
        time_limit=args.time_limit,
        threads=args.threads,
    )
    return OrchestratorConfig(
        mobility_mode=args.mobility_mode,
        solver=solver,
        allow_rentals=not args.no_rentals,
    )


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _cmd_solve(args) -> int:
    instance = load_instance(_read(args.instance))
    config = _configs(args)
    result = run_plan(instance, config)
    report = validate_plan(instance, result)

    stem = args.instance[:-5] if args.instance.endswith(".json") else args.instance
    out_path = Path(args.out) if args.out else Path(stem + ".plan.json")
    report_path = Path(args.report) if args.report else Path(stem + ".report.json")
    out_path.write_bytes(save_plan(result, report, instance.name))
    report_doc = {
        "ok": report.ok,
        "violations": [
            {"route": v.route, "rule": v.rule, "slot": v.slot,
             "measured": v.measured, "bound": v.bound}
            for v in report.violations
        ],
    }
    report_path.write_text(json.dumps(report_doc, indent=2, sort_keys=True) + "\n")

    served = len(result.served)
    total = served + len(result.unserved)
    print(f"{instance.name}: {len(result.routes)} routes, {served}/{total} orders served, "
          f"distance {result.total_distance:.2f}")
    if args.verbose:
        for route in result.routes:
            print(f"  {route.vehicle}: {' -> '.join(route.sequence)} "
                  f"(distance {route.distance:.2f}, duration {route.duration:.2f})")
        for oid in result.unserved:
            print(f"  unserved: {oid}")
    print(f"plan written to {out_path}, report to {report_path}")
    return 0 if not result.unserved and report.ok else 2


def _cmd_validate(args) -> int:
    instance = load_instance(_read(args.instance))
    name, plan_obj, _stored = load_plan(_read(args.plan))
    if name and name != instance.name:
        print(f"plan was produced for instance {name!r}, not {instance.name!r}",
              file=sys.stderr)
        return 1
    report = validate_plan(instance, plan_obj)
    if report.ok:
        print("plan ok")
        return 0
    for violation in report.violations:
        print(violation.describe())
    return 2


def _cmd_render(args) -> int:
    instance = load_instance(_read(args.instance))
    name, plan_obj, _stored = load_plan(_read(args.plan))
    if name and name != instance.name:
        print(f"plan was produced for instance {name!r}, not {instance.name!r}",
              file=sys.stderr)
        return 1
    Path(args.out).write_bytes(render_svg(instance, plan_obj))
    print(f"svg written to {args.out}")
    return 0


def _cmd_gen(args) -> int:
    instance = generate_fixture(args.name, args.variant)
    out_path = Path(args.out) if args.out else Path(f"{instance.name}.json")
    out_path.write_bytes(save_instance(instance))
    print(f"instance {instance.name} written to {out_path}")
    return 0


def _cmd_bench(args) -> int:
    rows = []
    backends = [b.strip() for b in args.backends.split(",") if b.strip()]
    names = [n.strip() for n in args.fixtures.split(",") if n.strip()]
    for name in names:
        instance = generate_fixture(name)
        for backend in backends:
            solver = SolverConfig(backend=backend, seed=args.seed,
                                  time_limit=args.time_limit, threads=args.threads)
            config = OrchestratorConfig(solver=solver)
            started = time.monotonic()
            try:
                result = run_plan(instance, config)
            except SizeLimitError as exc:
                rows.append({"instance": instance.name, "backend": backend,
                             "objective": None, "feasible": False,
                             "wall_time": time.monotonic() - started,
                             "error": str(exc)})
                continue
            report = validate_plan(instance, result)
            rows.append({
                "instance": instance.name,
                "backend": backend,
                "objective": result.total_distance,
                "served": len(result.served),
                "orders": len(instance.orders),
                "feasible": report.ok and not result.unserved,
                "wall_time": time.monotonic() - started,
            })
    header = f"{'instance':<12} {'backend':<10} {'objective':>10} {'feasible':>9} {'wall s':>8}"
    print(header)
    print("-" * len(header))
    for row in rows:
        objective = "-" if row["objective"] is None else f"{row['objective']:.2f}"
        print(f"{row['instance']:<12} {row['backend']:<10} {objective:>10} "
              f"{str(row['feasible']):>9} {row['wall_time']:>8.2f}")
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
        print(f"rows written to {args.out}")
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "validate": _cmd_validate,
    "render": _cmd_render,
    "gen": _cmd_gen,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return _COMMANDS[args.command](args)
    except (FormatError, InvalidInstanceError, SizeLimitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # the exit-code contract promises no crashes
        print(f"unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
