"""Command line front end: solve, verify, oracle, and bench subcommands.

Machine-readable JSON goes to stdout; human diagnostics go to stderr.  Exit
codes: 0 success, 1 input or validation error, 2 solver hit its iteration
cap, 3 certificate failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from collections import defaultdict

import numpy as np

from . import __version__
from .baselines import GridSpec, grid_oracle, projected_subgradient
from .certificates import check_certificates, sample_feasible_points
from .experiments import BatchConfig, generate_instance, run_batch, splitmix64, write_reports
from .regions import Ball, Box, ConvexRegion, Halfspace, ProjectionError, region_from_json
from .solver import CONVERGED, SolverConfig, solve
from .weber import instance_from_json

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2
EXIT_CERTIFICATE_FAILURE = 3


def _load_json_file(path, kind):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"{path}: malformed {kind} JSON at line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}"
        ) from None


def _load_instance(path):
    return instance_from_json(_load_json_file(path, "instance"))


def _load_region(path):
    return region_from_json(_load_json_file(path, "region"))


def _write_trace(path, trace):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        dim = trace[0][0].shape[0]
        writer.writerow(["iter"] + [f"x{i}" for i in range(dim)] + ["f", "step_norm"])
        for i, (x, f, step) in enumerate(trace):
            writer.writerow(
                [i] + [repr(float(v)) for v in x] + [repr(float(f)), repr(float(step))]
            )


def _cmd_solve(args):
    instance = _load_instance(args.instance)
    region = _load_region(args.region)
    config = SolverConfig(
        epsilon=args.epsilon,
        max_iterations=args.max_iter,
        record_trace=args.trace is not None,
    )
    result = solve(instance, region, config)
    if args.trace is not None:
        _write_trace(args.trace, result.trace)
    print(json.dumps({
        "solution": list(result.solution),
        "objective": result.objective,
        "iterations": result.iterations,
        "status": result.status,
        "kkt_residual": result.kkt_residual,
    }))
    return EXIT_OK if result.status == CONVERGED else EXIT_NOT_CONVERGED


def _verify_scenarios(args):
    """Yield (instance, region, points) triples for the verify run."""
    if (args.instance is None) != (args.region is None):
        raise ValueError("verify needs both --instance and --region, or neither")
    if args.instance is not None:
        instance = _load_instance(args.instance)
        region = _load_region(args.region)
        yield instance, region, sample_feasible_points(
            instance, region, args.samples, args.seed
        )
        return
    # Self-contained suite: random instances against rotating region shapes.
    points_per_scenario = 10
    n_scenarios = max(1, (args.samples + points_per_scenario - 1) // points_per_scenario)
    remaining = args.samples
    for s in range(n_scenarios):
        scenario_seed = splitmix64(args.seed ^ (s + 1))
        rng = np.random.default_rng(scenario_seed)
        instance = generate_instance(scenario_seed, m=int(rng.integers(3, 9)),
                                     vertex_std=5.0, weight_max=10.0)
        center = instance.vertices.mean(axis=0)
        shape = s % 3
        if shape == 0:
            normal = rng.standard_normal(2)
            region = ConvexRegion(
                (Halfspace(normal, float(normal @ center)),), 2
            )
        elif shape == 1:
            region = ConvexRegion(
                (Ball(center + rng.uniform(-2, 2, 2), float(rng.uniform(1, 8))),), 2
            )
        else:
            half = rng.uniform(1.0, 10.0, 2)
            region = ConvexRegion((Box(center - half, center + half),), 2)
        count = min(points_per_scenario, remaining)
        remaining -= count
        yield instance, region, sample_feasible_points(
            instance, region, count, scenario_seed
        )


def _cmd_verify(args):
    stats = defaultdict(lambda: {"count": 0, "worst": None, "failures": 0})
    total_points = 0
    for instance, region, points in _verify_scenarios(args):
        for point in points:
            report = check_certificates(instance, region, point)
            total_points += 1
            for check in report.checks:
                entry = stats[(check.name, check.kind, check.direction)]
                entry["count"] += 1
                if not check.note.startswith("skipped"):
                    # Worst: largest for <=-type residuals, smallest for margins.
                    if entry["worst"] is None:
                        entry["worst"] = check.residual
                    elif check.direction == "upper":
                        entry["worst"] = max(entry["worst"], check.residual)
                    else:
                        entry["worst"] = min(entry["worst"], check.residual)
                if not check.passed:
                    entry["failures"] += 1
    width = max(len(name) for name, _, _ in stats)
    print(f"certificate checks over {total_points} feasible points", file=sys.stderr)
    failures = 0
    summary = {}
    for (name, kind, _), entry in sorted(stats.items()):
        failures += entry["failures"]
        status = "pass" if entry["failures"] == 0 else f"FAIL x{entry['failures']}"
        worst = "      n/a" if entry["worst"] is None else f"{entry['worst']: .3e}"
        print(
            f"{name:<{width}}  {kind:<10}  n={entry['count']:<6}"
            f"  worst={worst}  {status}",
            file=sys.stderr,
        )
        summary[name] = {
            "kind": kind,
            "count": entry["count"],
            "worst": entry["worst"],
            "failures": entry["failures"],
        }
    print(json.dumps({
        "samples": total_points,
        "failures": failures,
        "checks": summary,
    }, sort_keys=True))
    return EXIT_OK if failures == 0 else EXIT_CERTIFICATE_FAILURE


def _cmd_oracle(args):
    instance = _load_instance(args.instance)
    region = _load_region(args.region)
    if args.method == "grid":
        if args.bounds is not None:
            lower = np.array(args.bounds[:2])
            upper = np.array(args.bounds[2:])
        else:
            lower = instance.vertices.min(axis=0) - 0.25 * (instance.diameter + 1.0)
            upper = instance.vertices.max(axis=0) + 0.25 * (instance.diameter + 1.0)
        spec = GridSpec(lower, upper, args.resolution, args.rounds)
        point, objective = grid_oracle(instance, region, spec)
    else:
        point, objective = projected_subgradient(instance, region, args.steps)
    print(json.dumps({"point": list(point), "objective": objective}))
    return EXIT_OK


def _cmd_bench(args):
    config = BatchConfig(
        num_experiments=1000 if args.full else args.experiments,
        m=args.m,
        vertex_std=args.vertex_std,
        weight_max=args.weight_max,
        epsilon=args.epsilon,
        seed=args.seed,
        baseline_steps=args.baseline_steps,
    )
    report = run_batch(config)
    paths = write_reports(report, args.out_dir)
    print(json.dumps({
        "aggregates": report.aggregates(),
        "files": {k: str(v) for k, v in paths.items()},
    }, sort_keys=True))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="weberloc",
        description="Weber location problems on closed convex regions: "
                    "solver, certificate verifier, reference oracles, benchmark.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance on one region")
    p.add_argument("--instance", required=True, help="instance JSON file")
    p.add_argument("--region", required=True, help="region JSON file")
    p.add_argument("--epsilon", type=float, default=1e-5,
                   help="step-norm stopping tolerance (default 1e-5)")
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--trace", metavar="CSV", help="write per-iteration trace CSV")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="run the certificate suite")
    p.add_argument("--instance", help="instance JSON file (with --region)")
    p.add_argument("--region", help="region JSON file (with --instance)")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("oracle", help="run a reference minimizer")
    p.add_argument("--method", choices=("grid", "subgradient"), required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--region", required=True)
    p.add_argument("--resolution", type=float, default=0.1,
                   help="initial grid spacing (grid method)")
    p.add_argument("--rounds", type=int, default=3,
                   help="10x refinement rounds (grid method)")
    p.add_argument("--bounds", type=float, nargs=4, metavar=("XLO", "YLO", "XHI", "YHI"),
                   help="search window; default: inflated vertex bounding box")
    p.add_argument("--steps", type=int, default=10_000,
                   help="iteration count (subgradient method)")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("bench", help="run the randomized benchmark batch")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--experiments", type=int, default=100)
    p.add_argument("--full", action="store_true",
                   help="run the full 1000-experiment batch")
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--epsilon", type=float, default=1e-5)
    p.add_argument("--baseline-steps", type=int, default=1500)
    p.add_argument("--vertex-std", type=float, default=10.0)
    p.add_argument("--weight-max", type=float, default=10.0)
    p.add_argument("--out-dir", default="bench_out")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, ProjectionError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
