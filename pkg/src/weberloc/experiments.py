"""Randomized benchmark harness on a fixed nine-constraint planar region.

The batch runner draws reproducible random instances (Gaussian vertices,
uniform weights), solves each with the fixed-point solver, re-solves with the
projected-subgradient baseline from the same starting point, and records
objective differences and constraint violations.  Seeding is counter-based
(splitmix64 over seed and experiment index), so a batch is bit-reproducible
from its configuration alone.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .baselines import projected_subgradient
from .regions import ConvexRegion, Halfspace, Poly2D
from .solver import SolverConfig, initial_point, solve
from .weber import WeberInstance

__all__ = [
    "BatchConfig",
    "BatchReport",
    "ExperimentRecord",
    "benchmark_region",
    "generate_instance",
    "run_batch",
    "splitmix64",
    "write_reports",
]

_MASK64 = (1 << 64) - 1


def splitmix64(value):
    """One splitmix64 output step; the documented seed-derivation mixer."""
    value = (value + 0x9E3779B97F4A7C15) & _MASK64
    value = ((value ^ (value >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    value = ((value ^ (value >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (value ^ (value >> 31)) & _MASK64


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_add(p, q):
    n = max(len(p), len(q))
    p = p + [Fraction(0)] * (n - len(p))
    q = q + [Fraction(0)] * (n - len(q))
    return [a + b for a, b in zip(p, q)]


def benchmark_region():
    """The fixed planar region of the benchmark: two cubic and seven linear cuts.

    The cubic boundary pieces are expanded from their factored rational form
    with exact fraction arithmetic and converted to floats once, so the
    transcription is reproducible to the last bit.
    """
    F = Fraction
    # Upper cubic:  y + (-4 - x/8 + 7x^2/72 + x^2 (x-3)/216) <= 0.
    upper = _poly_add(
        [F(-4), F(-1, 8), F(7, 72)],
        _poly_mul([F(0), F(0), F(1, 216)], [F(-3), F(1)]),
    )
    # Lower cubic:  -y + (-4 + (x-1)/8 + (x-1)^2/16 + (x-1)^2 (x-3)/32) <= 0.
    shifted = [F(-1), F(1)]  # x - 1
    shifted_sq = _poly_mul(shifted, shifted)
    lower = _poly_add([F(-4)], [c / 8 for c in shifted])
    lower = _poly_add(lower, [c / 16 for c in shifted_sq])
    lower = _poly_add(lower, _poly_mul([c / 32 for c in shifted_sq], [F(-3), F(1)]))

    constraints = (
        Poly2D(tuple(float(c) for c in upper), sign_y=1, offset=0.0),
        Halfspace(np.array([4.0 / 5.0, 1.0]), 59.0 / 10.0),
        Halfspace(np.array([1.0, 0.0]), 11.0 / 2.0),
        Halfspace(np.array([3.0 / 2.0, -1.0]), 35.0 / 4.0),
        Halfspace(np.array([1.0, -1.0]), 13.0 / 2.0),
        Poly2D(tuple(float(c) for c in lower), sign_y=-1, offset=0.0),
        Halfspace(np.array([-1.0 / 3.0, -1.0]), 11.0 / 3.0),
        Halfspace(np.array([-2.0 / 3.0, -1.0]), 13.0 / 3.0),
        Halfspace(np.array([-4.0, 1.0]), 19.0),
    )
    return ConvexRegion(constraints, dimension=2)


def generate_instance(seed, m=50, vertex_std=10.0, weight_max=10.0):
    """Reproducible random instance: Gaussian vertices, uniform weights.

    Attempt ``k`` draws from ``PCG64(splitmix64(splitmix64(seed) + k))``;
    degenerate draws (coincident or collinear vertices, zero weights) move
    to the next attempt, so the result is deterministic in ``seed`` alone.
    """
    if m < 3:
        raise ValueError("need at least 3 vertices")
    base = splitmix64(seed & _MASK64)
    for attempt in range(100):
        rng = np.random.Generator(np.random.PCG64(splitmix64(base + attempt)))
        vertices = rng.normal(0.0, vertex_std, size=(m, 2))
        weights = rng.uniform(0.0, weight_max, size=m)
        if np.any(weights == 0.0):
            continue
        try:
            return WeberInstance(vertices, weights)
        except ValueError:
            continue
    raise RuntimeError(f"no valid instance after 100 attempts for seed {seed}")


@dataclass(frozen=True)
class BatchConfig:
    """Batch shape and seeds; defaults are the desk-scale run."""

    num_experiments: int = 100
    m: int = 50
    vertex_std: float = 10.0
    weight_max: float = 10.0
    epsilon: float = 1e-5
    seed: int = 1
    baseline_steps: int = 1500

    def __post_init__(self):
        if self.num_experiments < 1:
            raise ValueError("num_experiments must be at least 1")
        if self.m < 3:
            raise ValueError("m must be at least 3")
        if not (self.vertex_std > 0 and self.weight_max > 0 and self.epsilon > 0):
            raise ValueError("vertex_std, weight_max and epsilon must be positive")
        if self.baseline_steps < 1:
            raise ValueError("baseline_steps must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class ExperimentRecord:
    index: int
    seed: int
    f_solver: float
    f_baseline: float
    difference: float
    max_violation: float
    iterations: int
    status: str


@dataclass(frozen=True)
class BatchReport:
    config: BatchConfig
    records: tuple

    def aggregates(self):
        diffs = [r.difference for r in self.records if not np.isnan(r.difference)]
        viols = [r.max_violation for r in self.records if not np.isnan(r.max_violation)]
        return {
            "num_experiments": len(self.records),
            "num_failed": sum(1 for r in self.records if r.status.startswith("Error")),
            "count_difference_gt_0.01": sum(1 for d in diffs if d > 0.01),
            "max_difference": max(diffs) if diffs else float("nan"),
            "min_difference": min(diffs) if diffs else float("nan"),
            "max_violation": max(viols) if viols else float("nan"),
            "mean_iterations": float(
                np.mean([r.iterations for r in self.records])
            ),
        }


def run_batch(config):
    """Run the full experiment batch; per-experiment failures are recorded.

    Experiment ``i`` uses seed ``splitmix64(config.seed XOR i)`` for its
    instance.  The baseline starts from the same initial point as the
    solver.  Returns a :class:`BatchReport`.
    """
    region = benchmark_region()
    solver_config = SolverConfig(epsilon=config.epsilon)
    records = []
    for i in range(config.num_experiments):
        exp_seed = splitmix64(config.seed ^ i)
        try:
            instance = generate_instance(
                exp_seed, config.m, config.vertex_std, config.weight_max
            )
            result = solve(instance, region, solver_config)
            start = initial_point(instance, region)
            _, f_baseline = projected_subgradient(
                instance, region, config.baseline_steps, start=start
            )
            records.append(ExperimentRecord(
                index=i,
                seed=exp_seed,
                f_solver=result.objective,
                f_baseline=f_baseline,
                difference=f_baseline - result.objective,
                max_violation=region.max_excess(result.solution),
                iterations=result.iterations,
                status=result.status,
            ))
        except Exception as exc:  # record, keep the batch going
            records.append(ExperimentRecord(
                index=i,
                seed=exp_seed,
                f_solver=float("nan"),
                f_baseline=float("nan"),
                difference=float("nan"),
                max_violation=float("nan"),
                iterations=0,
                status=f"Error: {exc}",
            ))
    return BatchReport(config=config, records=tuple(records))


def write_reports(report, out_dir):
    """Write report.csv, report.json, and the two plot-data CSV files.

    Floats are written with ``repr`` (shortest round-trip form), so byte
    output is a pure function of the batch configuration.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}

    paths["csv"] = out_dir / "report.csv"
    with open(paths["csv"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "experiment", "seed", "f_solver", "f_baseline", "difference",
            "max_violation", "iterations", "status",
        ])
        for r in report.records:
            writer.writerow([
                r.index, r.seed, repr(r.f_solver), repr(r.f_baseline),
                repr(r.difference), repr(r.max_violation), r.iterations, r.status,
            ])

    paths["json"] = out_dir / "report.json"
    payload = {
        "config": {
            "num_experiments": report.config.num_experiments,
            "m": report.config.m,
            "vertex_std": report.config.vertex_std,
            "weight_max": report.config.weight_max,
            "epsilon": report.config.epsilon,
            "seed": report.config.seed,
            "baseline_steps": report.config.baseline_steps,
        },
        "aggregates": report.aggregates(),
    }
    with open(paths["json"], "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    for name, column in (("difference", "difference"), ("feasibility", "max_violation")):
        path = out_dir / f"plotdata_{name}.csv"
        paths[name] = path
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["experiment", column])
            for r in report.records:
                writer.writerow([r.index, repr(getattr(r, column))])

    return paths
