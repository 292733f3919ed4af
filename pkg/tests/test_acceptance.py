"""Acceptance gate: every criterion asserted at its stated tolerance.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
pass lines.  Each test prints exactly one line of the form
``ACCEPTANCE <n> <name>: PASS ...`` on success.
"""

import math
import time

import numpy as np
import pytest

from weberloc import (
    AffineEquality,
    Ball,
    Box,
    BatchConfig,
    ConvexRegion,
    GridSpec,
    Halfspace,
    Poly2D,
    SmoothConvexInequality,
    SolverConfig,
    WeberInstance,
    benchmark_region,
    check_certificates,
    constrained_step,
    force_resultant,
    grid_oracle,
    initial_point,
    run_batch,
    solve,
    solve_unconstrained,
    vertex_index,
    weber_value,
)
from weberloc.weber import modified_weiszfeld_step
from conftest import feasible_point, random_instance, random_simple_region

EPS_MACHINE = np.finfo(float).eps


def report(n, name, detail, limit, elapsed):
    assert elapsed <= limit, f"criterion {n} exceeded its {limit}s budget ({elapsed:.1f}s)"
    print(f"ACCEPTANCE {n} {name}: PASS ({detail}, {elapsed:.1f}s)")


def moved(x, q):
    return np.linalg.norm(q - x) > 10.0 * EPS_MACHINE * (1.0 + np.linalg.norm(x))


def vertex_cutting_region(instance, k, theta=0.5):
    a = instance.vertices[k]
    t = modified_weiszfeld_step(instance, a)
    direction = t - a
    norm = np.linalg.norm(direction)
    if norm < 1e-9:
        return None
    normal = direction / norm
    return ConvexRegion((Halfspace(normal, float(normal @ (a + theta * (t - a)))),), 2)


def test_criterion_1_strict_descent():
    """f strictly decreases at every non-fixed point of the iteration."""
    start = time.time()
    rng = np.random.default_rng(101)
    checked = tight = 0
    worst_margin = math.inf
    while checked < 10_000:
        instance = random_instance(rng, m=int(rng.integers(3, 11)))
        region = random_simple_region(rng, instance)
        feasible_vertices = [
            v for v in instance.vertices if region.contains(v)
        ]
        for i in range(40):
            if checked >= 10_000:
                break
            if i % 5 == 0 and feasible_vertices:
                x = np.array(feasible_vertices[(i // 5) % len(feasible_vertices)])
            else:
                x = feasible_point(rng, region, instance.vertices.mean(axis=0))
            q = constrained_step(instance, region, x)
            if not moved(x, q):
                continue
            f_x, f_q = weber_value(instance, x), weber_value(instance, q)
            margin = f_x - f_q
            if abs(margin) <= 1e-14 * f_x:
                tight += 1  # degenerate-tight, flagged rather than failed
            else:
                assert margin > 0.0, (
                    f"descent violated: margin {margin} at {x} (f={f_x})"
                )
                worst_margin = min(worst_margin, margin)
            checked += 1
    report(
        1, "strict-descent",
        f"{checked} moving points, {tight} degenerate-tight, "
        f"smallest margin {worst_margin:.2e}",
        limit=60.0, elapsed=time.time() - start,
    )


def test_criterion_2_certificate_suite():
    """Identity and inequality certificates on 1000 seeded points."""
    start = time.time()
    rng = np.random.default_rng(202)
    checked = 0
    worst_identity = 0.0
    while checked < 1000:
        instance = random_instance(rng, m=int(rng.integers(3, 9)))
        use_vertex = checked % 10 < 3
        if use_vertex:
            k = int(rng.integers(0, instance.m))
            region = vertex_cutting_region(instance, k, float(rng.uniform(0.2, 0.8)))
            if region is None:
                continue
            x = instance.vertices[k]
        else:
            region = random_simple_region(rng, instance)
            x = feasible_point(rng, region, instance.vertices.mean(axis=0))
        result = check_certificates(instance, region, x)
        assert result.passed, f"certificate failures at {x}: {result.failures}"
        for check in result.checks:
            if check.kind == "identity":
                assert check.residual <= 1e-8
                worst_identity = max(worst_identity, check.residual)
        checked += 1
    report(
        2, "certificate-suite",
        f"{checked} points, worst identity residual {worst_identity:.2e}",
        limit=30.0, elapsed=time.time() - start,
    )


def test_criterion_3_unconstrained_agreement():
    """Hull-containing box: constrained and free solutions agree to 10 eps."""
    start = time.time()
    rng = np.random.default_rng(303)
    eps = 1e-5
    worst = 0.0
    for _ in range(100):
        instance = random_instance(rng, m=int(rng.integers(3, 11)))
        lo = instance.vertices.min(axis=0) - 1.0
        hi = instance.vertices.max(axis=0) + 1.0
        region = ConvexRegion((Box(lo, hi),), 2)
        res = solve(instance, region, SolverConfig(epsilon=eps))
        ref = solve_unconstrained(instance, epsilon=eps)
        gap = float(np.linalg.norm(res.solution - ref.solution))
        assert gap <= 10.0 * eps
        worst = max(worst, gap)
    report(
        3, "unconstrained-agreement",
        f"100 instances, worst gap {worst:.2e} <= {10 * eps:.0e}",
        limit=30.0, elapsed=time.time() - start,
    )


def test_criterion_4_oracle_equivalence():
    """Solver objective matches the grid oracle on halfplane-cut problems."""
    start = time.time()
    rng = np.random.default_rng(404)
    done = 0
    worst_ratio = 0.0
    while done < 50:
        instance = random_instance(rng, m=int(rng.integers(3, 11)))
        free = solve_unconstrained(instance, epsilon=1e-10)
        centroid = instance.vertices.mean(axis=0)
        direction = free.solution - centroid
        if np.linalg.norm(direction) < 1e-9:
            direction = np.array([1.0, 0.3])
        normal = direction / np.linalg.norm(direction)
        offset = float(normal @ free.solution) - 0.4  # free optimum cut out
        region = ConvexRegion((Halfspace(normal, offset),), 2)
        res = solve(instance, region, SolverConfig(epsilon=1e-5))
        lo = instance.vertices.min(axis=0) - 2.0
        hi = instance.vertices.max(axis=0) + 2.0
        spec = GridSpec(lo, hi, 0.1, refinement_rounds=3)
        _, oracle_value = grid_oracle(instance, region, spec)
        weight_sum = float(np.sum(instance.weights))
        tolerance = weight_sum * 1e-4 + 1e-6
        gap = abs(res.objective - oracle_value)
        assert gap <= tolerance, f"gap {gap} > {tolerance}"
        worst_ratio = max(worst_ratio, gap / tolerance)
        done += 1
    report(
        4, "oracle-equivalence",
        f"50 instances, worst gap at {100 * worst_ratio:.1f}% of tolerance",
        limit=120.0, elapsed=time.time() - start,
    )


def test_criterion_5_vertex_non_stalling():
    """Starting at a feasible non-optimal vertex always moves and descends."""
    start = time.time()
    rng = np.random.default_rng(505)
    done = 0
    while done < 100:
        instance = random_instance(rng, m=int(rng.integers(3, 9)))
        fs = [weber_value(instance, v) for v in instance.vertices]
        k_best = int(np.argmin(fs))
        if done % 2 == 0:
            lo = instance.vertices.min(axis=0) - 1.0
            hi = instance.vertices.max(axis=0) + 1.0
            region = ConvexRegion((Box(lo, hi),), 2)
        else:
            # Cut the best vertex's update out, exercising the segment rule.
            region = vertex_cutting_region(instance, k_best, 0.5)
            if region is None:
                continue
        x0 = initial_point(instance, region)
        k0 = vertex_index(instance, x0)
        assert k0 is not None  # the rule starts at a feasible vertex here
        if not moved(x0, constrained_step(instance, region, x0)):
            continue  # that vertex is optimal; criterion wants non-optimal starts
        res = solve(instance, region, SolverConfig(record_trace=True))
        first_step = res.trace[1][2]
        assert first_step > 0.0
        assert res.trace[1][1] < res.trace[0][1]
        done += 1
    report(
        5, "vertex-non-stalling", "100 vertex starts moved with strict descent",
        limit=10.0, elapsed=time.time() - start,
    )


def test_criterion_6_benchmark_batch():
    """Desk-scale benchmark: feasible solutions, never beaten materially."""
    start = time.time()
    config = BatchConfig(
        num_experiments=100, m=50, vertex_std=10.0, weight_max=10.0,
        epsilon=1e-5, seed=2026, baseline_steps=1500,
    )
    batch = run_batch(config)
    assert len(batch.records) == 100
    worst_violation = -math.inf
    worst_difference = math.inf
    for record in batch.records:
        assert not record.status.startswith("Error"), record.status
        assert record.max_violation <= 1e-6
        assert record.difference >= -1e-4
        worst_violation = max(worst_violation, record.max_violation)
        worst_difference = min(worst_difference, record.difference)
    agg = batch.aggregates()
    report(
        6, "benchmark-batch",
        f"100 experiments, max violation {worst_violation:.1e}, "
        f"min (baseline - solver) {worst_difference:.2e}, "
        f"in-repo analogue of the >0.01 count: {agg['count_difference_gt_0.01']}",
        limit=300.0, elapsed=time.time() - start,
    )


def test_criterion_7_gradient_check():
    """The pull resultant is the negative gradient away from the vertices."""
    start = time.time()
    rng = np.random.default_rng(707)
    checked = 0
    worst = 0.0
    while checked < 1000:
        instance = random_instance(rng, m=int(rng.integers(3, 9)))
        x = rng.normal(0.0, 6.0, size=2)
        if vertex_index(instance, x, snap_tol=1e-4) is not None:
            continue
        pull = force_resultant(instance, x)
        grad = np.zeros(2)
        h = 1e-6
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            grad[i] = (
                weber_value(instance, x + e) - weber_value(instance, x - e)
            ) / (2.0 * h)
        err = float(np.linalg.norm(pull + grad))
        bound = 1e-5 * (1.0 + float(np.linalg.norm(pull)))
        assert err <= bound
        worst = max(worst, err / bound)
        checked += 1
    report(
        7, "gradient-check",
        f"1000 points, worst error at {100 * worst:.1f}% of bound",
        limit=10.0, elapsed=time.time() - start,
    )


def _projection_property_run(region, rng, points, feasible_refs):
    for p in points:
        z = region.project(p)
        assert region.contains(z, 1e-9)
        assert np.linalg.norm(region.project(z) - z) <= 1e-8
        for y in feasible_refs:
            assert np.dot(p - z, y - z) <= 1e-8
    for i in range(0, len(points) - 1, 2):
        a, b = points[i], points[i + 1]
        gap = np.linalg.norm(region.project(a) - region.project(b))
        assert gap <= np.linalg.norm(a - b) + 1e-10


def test_criterion_8_projection_properties():
    """Idempotence, nonexpansiveness, and the variational inequality."""
    start = time.time()
    rng = np.random.default_rng(808)
    regions = {
        "halfspace": ConvexRegion((Halfspace(np.array([0.7, -0.4]), 0.8),), 2),
        "ball": ConvexRegion((Ball(np.array([1.0, -2.0]), 3.0),), 2),
        "box": ConvexRegion((Box(np.array([-2.0, -1.0]), np.array([1.5, 3.0])),), 2),
        "affine_equality": ConvexRegion(
            (AffineEquality(np.array([1.0, 2.0]), 1.0),), 2
        ),
        "poly2d": ConvexRegion(
            (Poly2D((2.0, -0.3, 0.5), sign_y=-1, offset=0.0),), 2
        ),
        "smooth": ConvexRegion(
            (
                SmoothConvexInequality(
                    value=lambda y: float(y @ y) - 9.0,
                    gradient=lambda y: 2.0 * y,
                    dim=2,
                ),
            ),
            2,
        ),
        "nine-constraint": benchmark_region(),
    }
    for name, region in regions.items():
        n_points = 1000 if name != "smooth" else 400
        points = rng.normal(0.0, 6.0, size=(n_points, 2))
        refs = [region.project(rng.normal(0.0, 3.0, size=2)) for _ in range(12)]
        _projection_property_run(region, rng, points, refs)
    report(
        8, "projection-properties",
        f"{len(regions)} region kinds checked",
        limit=60.0, elapsed=time.time() - start,
    )
