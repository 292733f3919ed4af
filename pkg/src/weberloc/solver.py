"""Fixed-point solver for the Weber problem on a closed convex region.

Each iteration applies the vertex-safe Weiszfeld update and then restores
feasibility: off the vertices the update is orthogonally projected onto the
region, while at a feasible vertex the iterate moves to the farthest feasible
point of the segment from the update back to the vertex.  The iteration is
monotone (the objective never increases, and strictly decreases off fixed
points), all iterates are feasible, and fixed points at regular off-vertex
solutions satisfy the first-order optimality conditions, reported here as a
projected-gradient residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .regions import FEASIBILITY_TOL, SEGMENT_TOL, segment_infimum
from .weber import (
    force_resultant,
    modified_weiszfeld_step,
    vertex_index,
    weber_value,
)

__all__ = [
    "CONVERGED",
    "MAX_ITERATIONS_REACHED",
    "SolveResult",
    "SolverConfig",
    "constrained_step",
    "directional_derivative_from_vertex",
    "initial_point",
    "projected_gradient_residual",
    "solve",
    "solve_unconstrained",
    "vertex_descent_check",
    "vertex_optimality_surrogate",
]

CONVERGED = "Converged"
MAX_ITERATIONS_REACHED = "MaxIterationsReached"


@dataclass
class SolverConfig:
    """Stopping and tolerance knobs for :func:`solve`.

    epsilon is the stopping tolerance on the step norm; snap_tol=None uses
    the instance default vertex-identification radius.
    """

    epsilon: float = 1e-5
    max_iterations: int = 100_000
    snap_tol: float | None = None
    feasibility_tol: float = FEASIBILITY_TOL
    record_trace: bool = False

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.feasibility_tol < 0.0:
            raise ValueError("feasibility_tol must be nonnegative")


@dataclass
class SolveResult:
    """Outcome of a solve: final point, objective, and optimality residual.

    ``trace`` (when recorded) is a list of ``(iterate, objective, step_norm)``
    tuples, starting at the initial point with step norm ``nan``.
    """

    solution: np.ndarray
    objective: float
    iterations: int
    status: str
    kkt_residual: float
    trace: list | None = None


def constrained_step(instance, region, x, *, snap_tol=None, feasibility_tol=FEASIBILITY_TOL):
    """One step of the constrained iteration from a feasible point.

    Off the vertices: project the vertex-safe Weiszfeld update onto the
    region.  At a feasible vertex: move to the farthest feasible point of
    the segment from the update back to the vertex, so the step stays inside
    the region without losing the descent direction.
    """
    x = np.asarray(x, dtype=float)
    if not region.contains(x, feasibility_tol):
        raise ValueError(
            f"constrained_step requires a feasible point (max excess "
            f"{region.max_excess(x):.3e})"
        )
    t = modified_weiszfeld_step(instance, x, snap_tol)
    k = vertex_index(instance, x, snap_tol)
    if k is None:
        return region.project(t)
    anchor = instance.vertices[k]
    lam = segment_infimum(region, t, anchor, feasibility_tol=feasibility_tol)
    if lam >= 1.0 - 2.0 * SEGMENT_TOL:
        # Below the bisection resolution the whole open segment is
        # infeasible: the step stays exactly at the vertex.
        return np.array(anchor, dtype=float)
    return (1.0 - lam) * t + lam * anchor


def initial_point(instance, region):
    """Feasible starting point: best feasible vertex, else projected origin.

    Among feasible vertices the one with the smallest objective wins, ties
    broken by lowest index; when no vertex is feasible, the projection of
    the origin is used.
    """
    best = None
    for j in range(instance.m):
        v = instance.vertices[j]
        if region.contains(v):
            f = weber_value(instance, v)
            if best is None or f < best[0]:
                best = (f, j)
    if best is not None:
        return np.array(instance.vertices[best[1]], dtype=float)
    return region.project(np.zeros(instance.dimension))


def solve(instance, region, config=None):
    """Run the constrained fixed-point iteration to the step-norm tolerance.

    Parameters
    ----------
    instance : WeberInstance
    region : ConvexRegion
    config : SolverConfig, optional

    Returns
    -------
    SolveResult
        Status is ``Converged`` when the step norm drops below epsilon,
        ``MaxIterationsReached`` otherwise.  The KKT residual is the
        projected-gradient residual at the final iterate (a sampled
        directional-derivative surrogate when the final iterate is a
        vertex, where the objective is nonsmooth).
    """
    if config is None:
        config = SolverConfig()
    x = initial_point(instance, region)
    f = weber_value(instance, x)
    trace = [(x.copy(), f, math.nan)] if config.record_trace else None
    iterations = 0
    status = MAX_ITERATIONS_REACHED
    for _ in range(config.max_iterations):
        k = vertex_index(instance, x, config.snap_tol)
        if k is not None:
            x = np.array(instance.vertices[k], dtype=float)
        x_next = constrained_step(
            instance,
            region,
            x,
            snap_tol=config.snap_tol,
            feasibility_tol=config.feasibility_tol,
        )
        step = float(np.linalg.norm(x_next - x))
        x = x_next
        f = weber_value(instance, x)
        iterations += 1
        if trace is not None:
            trace.append((x.copy(), f, step))
        if step < config.epsilon:
            status = CONVERGED
            break
    residual = _final_residual(instance, region, x, config.snap_tol)
    return SolveResult(
        solution=x,
        objective=f,
        iterations=iterations,
        status=status,
        kkt_residual=residual,
        trace=trace,
    )


def solve_unconstrained(instance, epsilon=1e-9, max_iterations=100_000, snap_tol=None,
                        record_trace=False):
    """Vertex-safe Weiszfeld iteration without constraints.

    Starts at the best vertex and iterates the plain update; used as the
    unconstrained reference solution and by the estimator when no region is
    given.
    """
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    fs = [weber_value(instance, v) for v in instance.vertices]
    x = np.array(instance.vertices[int(np.argmin(fs))], dtype=float)
    f = min(fs)
    trace = [(x.copy(), f, math.nan)] if record_trace else None
    iterations = 0
    status = MAX_ITERATIONS_REACHED
    for _ in range(max_iterations):
        x_next = modified_weiszfeld_step(instance, x, snap_tol)
        step = float(np.linalg.norm(x_next - x))
        x = x_next
        f = weber_value(instance, x)
        iterations += 1
        if trace is not None:
            trace.append((x.copy(), f, step))
        if step < epsilon:
            status = CONVERGED
            break
    k = vertex_index(instance, x, snap_tol)
    r = float(np.linalg.norm(force_resultant(instance, x, snap_tol)))
    residual = max(0.0, r - float(instance.weights[k])) if k is not None else r
    return SolveResult(x, f, iterations, status, residual, trace)


def directional_derivative_from_vertex(instance, k, z, snap_tol=None):
    """One-sided derivative of the objective at vertex k toward ``z``.

    Closed form: ``w_k * |z - a_k| - <pull, z - a_k>`` where ``pull`` is the
    force resultant at the vertex.  This exists even though the objective is
    nonsmooth at the vertex.
    """
    a = instance.vertices[k]
    z = np.asarray(z, dtype=float)
    d = z - a
    pull = force_resultant(instance, a, snap_tol)
    return float(instance.weights[k]) * float(np.linalg.norm(d)) - float(pull @ d)


def vertex_descent_check(instance, region, k, *, snap_tol=None,
                         feasibility_tol=FEASIBILITY_TOL):
    """Directional derivative at feasible vertex k toward its constrained step.

    Returns ``(derivative, is_descent)``.  The derivative is computed from
    the closed form above; ``is_descent`` is True when the step actually
    moves and the derivative is negative, certifying that leaving the vertex
    strictly decreases the objective.
    """
    if not 0 <= k < instance.m:
        raise ValueError(f"vertex index {k} out of range")
    a = instance.vertices[k]
    if not region.contains(a, feasibility_tol):
        raise ValueError(f"vertex {k} is not feasible")
    q = constrained_step(instance, region, a, snap_tol=snap_tol,
                         feasibility_tol=feasibility_tol)
    derivative = directional_derivative_from_vertex(instance, k, q, snap_tol)
    moved = float(np.linalg.norm(q - a)) > 10.0 * np.finfo(float).eps * (
        1.0 + float(np.linalg.norm(a))
    )
    return derivative, bool(moved and derivative < 0.0)


def projected_gradient_residual(instance, region, x, snap_tol=None):
    """Distance from ``x`` to the projection of a unit negative-gradient step.

    Zero exactly at constrained minimizers (off the vertices); reported, not
    used for stopping.
    """
    x = np.asarray(x, dtype=float)
    pull = force_resultant(instance, x, snap_tol)
    return float(np.linalg.norm(x - region.project(x + pull)))


def vertex_optimality_surrogate(instance, region, k, *, snap_tol=None,
                                feasibility_tol=FEASIBILITY_TOL):
    """Nonsmooth optimality surrogate at a feasible vertex.

    The objective has no gradient at a vertex, so optimality is probed
    through one-sided directional derivatives along a deterministic fan of
    feasible directions: the constrained step, the directions toward the
    other vertices, and the coordinate directions, each re-projected into
    the region.  Returns ``max(0, -min normalized derivative)``: zero means
    no sampled feasible direction is a descent direction.
    """
    a = instance.vertices[k]
    h = 1e-3 * (1.0 + instance.diameter)
    candidates = [constrained_step(instance, region, a, snap_tol=snap_tol,
                                   feasibility_tol=feasibility_tol)]
    for j in range(instance.m):
        if j != k:
            d = instance.vertices[j] - a
            candidates.append(region.project(a + h * d / np.linalg.norm(d)))
    for i in range(instance.dimension):
        e = np.zeros(instance.dimension)
        e[i] = h
        candidates.append(region.project(a + e))
        candidates.append(region.project(a - e))
    worst = 0.0
    for z in candidates:
        nz = float(np.linalg.norm(z - a))
        if nz <= 10.0 * np.finfo(float).eps * (1.0 + float(np.linalg.norm(a))):
            continue
        deriv = directional_derivative_from_vertex(instance, k, z, snap_tol) / nz
        worst = min(worst, deriv)
    return -worst


def _final_residual(instance, region, x, snap_tol):
    k = vertex_index(instance, x, snap_tol)
    if k is None:
        return projected_gradient_residual(instance, region, x, snap_tol)
    return vertex_optimality_surrogate(instance, region, k, snap_tol=snap_tol)
