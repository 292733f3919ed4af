"""Runtime-checkable identities and inequalities behind the descent proof.

The solver's monotonicity rests on a web of exact algebraic identities and
inequalities relating the objective, the vertex-safe update, the projected
step, and a quadratic-over-distance surrogate of the objective.  This module
evaluates all of them numerically at a feasible point and reports residuals,
serving as a high-coverage oracle: identity residuals beyond tolerance mean
an implementation bug, inequality violations would contradict convexity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .regions import FEASIBILITY_TOL
from .solver import constrained_step
from .weber import (
    averaging_weight,
    force_resultant,
    modified_weiszfeld_step,
    vertex_blend,
    vertex_index,
    weber_value,
    weiszfeld_average,
)

__all__ = [
    "CertificateCheck",
    "CertificateReport",
    "IndexSplit",
    "check_certificates",
    "displacement_sum",
    "index_split",
    "sample_feasible_points",
    "surrogate_value",
]

IDENTITY_TOL = 1e-9
CLOSED_FORM_RTOL = 1e-8
INEQUALITY_SLACK = 1e-9
GAP_SLACK = 1e-12
TIGHT_RTOL = 1e-14  # strict inequalities with less slack are flagged, not failed


@dataclass(frozen=True)
class IndexSplit:
    """Coordinates where the projected step differs from the raw update."""

    moved: tuple
    fixed: tuple

    def __post_init__(self):
        if set(self.moved) & set(self.fixed):
            raise ValueError("moved and fixed index sets overlap")


@dataclass(frozen=True)
class CertificateCheck:
    name: str
    kind: str  # "identity" or "inequality"
    residual: float
    tolerance: float
    passed: bool
    note: str = ""
    # "upper": residual must stay <= tolerance; "lower": residual must stay
    # above -tolerance (margins, larger is better).
    direction: str = "upper"


@dataclass(frozen=True)
class CertificateReport:
    """All certificate checks evaluated at one feasible point."""

    point: np.ndarray
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return tuple(c for c in self.checks if not c.passed)

    def __str__(self):
        width = max(len(c.name) for c in self.checks)
        lines = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            note = f"  ({c.note})" if c.note else ""
            lines.append(
                f"{c.name:<{width}}  {c.kind:<10}  residual {c.residual: .3e}"
                f"  tol {c.tolerance:.1e}  {status}{note}"
            )
        return "\n".join(lines)


def _norm_on(v, idx):
    if len(idx) == 0:
        return 0.0
    return float(np.linalg.norm(v[list(idx)]))


def _inner_on(u, v, idx):
    if len(idx) == 0:
        return 0.0
    idx = list(idx)
    return float(np.dot(u[idx], v[idx]))


def index_split(instance, region, x, split_tol=None, *, snap_tol=None,
                feasibility_tol=FEASIBILITY_TOL):
    """Partition coordinates by whether projection moved the raw update.

    Coordinates where the constrained step and the raw update agree within
    ``split_tol`` go to ``fixed``, the rest to ``moved``.  The default
    tolerance is ``1e-12 * (1 + |update|)``.
    """
    t = modified_weiszfeld_step(instance, x, snap_tol)
    q = constrained_step(instance, region, x, snap_tol=snap_tol,
                         feasibility_tol=feasibility_tol)
    return _index_split_from(t, q, split_tol)


def _index_split_from(t, q, split_tol=None):
    if split_tol is None:
        split_tol = 1e-12 * (1.0 + float(np.linalg.norm(t)))
    moved = tuple(i for i in range(t.shape[0]) if abs(t[i] - q[i]) > split_tol)
    fixed = tuple(i for i in range(t.shape[0]) if abs(t[i] - q[i]) <= split_tol)
    return IndexSplit(moved=moved, fixed=fixed)


def displacement_sum(instance, region, x, *, snap_tol=None,
                     feasibility_tol=FEASIBILITY_TOL):
    """Inverse-distance weighted displacement sum at a feasible point.

    Defined by its sums: off the vertices, ``sum_j w_j/|x-a_j| (Q(x)-a_j)``;
    at a vertex the own term is dropped and each remaining vertex is blended
    with the anchor.  Identical to ``2 A(x) (Q(x) - T(x))``, which the
    certificate suite verifies.
    """
    q = constrained_step(instance, region, x, snap_tol=snap_tol,
                         feasibility_tol=feasibility_tol)
    return _displacement_sum_at(instance, np.asarray(x, float), q, snap_tol)


def _displacement_sum_at(instance, x, q, snap_tol=None):
    k = vertex_index(instance, x, snap_tol)
    if k is None:
        d = np.linalg.norm(instance.vertices - x, axis=1)
        coeff = instance.weights / d
        terms = coeff[:, None] * (q - instance.vertices)
    else:
        a = instance.vertices[k]
        _, blend = vertex_blend(instance, a, snap_tol)
        keep = np.arange(instance.m) != k
        d = np.linalg.norm(instance.vertices[keep] - a, axis=1)
        coeff = instance.weights[keep] / d
        targets = (1.0 - blend) * instance.vertices[keep] + blend * a
        terms = coeff[:, None] * (q - targets)
    return np.array([math.fsum(col) for col in terms.T])


def surrogate_value(instance, region, x, y, *, split_tol=None, snap_tol=None,
                    feasibility_tol=FEASIBILITY_TOL):
    """Quadratic-over-distance surrogate of the objective anchored at ``x``.

    Off the vertices, coordinates that the projection moved are substituted
    from the constrained step before the quadratic sum is taken; at a vertex
    the own term degenerates to a weighted distance.
    """
    q = constrained_step(instance, region, x, snap_tol=snap_tol,
                         feasibility_tol=feasibility_tol)
    t = modified_weiszfeld_step(instance, x, snap_tol)
    split = _index_split_from(t, q, split_tol)
    return _surrogate_at(instance, np.asarray(x, float), q, split, np.asarray(y, float),
                         snap_tol)


def _substitute(q, split, y):
    e = np.array(y, dtype=float)
    for i in split.moved:
        e[i] = q[i]
    return e


def _surrogate_at(instance, x, q, split, y, snap_tol=None):
    k = vertex_index(instance, x, snap_tol)
    if k is None:
        e = _substitute(q, split, y)
        d = np.linalg.norm(instance.vertices - x, axis=1)
        return math.fsum(
            w / (2.0 * dj) * float(np.dot(e - aj, e - aj))
            for w, dj, aj in zip(instance.weights, d, instance.vertices)
        )
    a = instance.vertices[k]
    total = math.fsum(
        instance.weights[j]
        / (2.0 * float(np.linalg.norm(a - instance.vertices[j])))
        * float(np.dot(y - instance.vertices[j], y - instance.vertices[j]))
        for j in range(instance.m)
        if j != k
    )
    return total + float(instance.weights[k]) * float(np.linalg.norm(y - a))


def check_certificates(instance, region, x, *, split_tol=None, snap_tol=None,
                       feasibility_tol=FEASIBILITY_TOL):
    """Evaluate every identity and inequality certificate at a feasible point.

    Returns a :class:`CertificateReport`.  Inequalities that require the
    point to move (strict descent and the surrogate decrease) are reported
    as skipped when ``x`` is a fixed point of the iteration; strict
    inequalities whose measured slack is below ``1e-14 * f(x)`` are flagged
    degenerate-tight instead of failed.
    """
    x = np.asarray(x, dtype=float)
    if not region.contains(x, feasibility_tol):
        raise ValueError("certificates are only defined at feasible points")

    k = vertex_index(instance, x, snap_tol)
    base = instance.vertices[k] if k is not None else x
    t = modified_weiszfeld_step(instance, base, snap_tol)
    q = constrained_step(instance, region, base, snap_tol=snap_tol,
                         feasibility_tol=feasibility_tol)
    split = _index_split_from(t, q, split_tol)
    weight_half_sum = averaging_weight(instance, base, snap_tol)
    avg = weiszfeld_average(instance, base, snap_tol)
    pull = force_resultant(instance, base, snap_tol)
    _, blend = vertex_blend(instance, base, snap_tol)
    f_x = weber_value(instance, base)
    f_q = weber_value(instance, q)
    step_norm = float(np.linalg.norm(q - base))
    moved = step_norm > 10.0 * np.finfo(float).eps * (1.0 + float(np.linalg.norm(base)))

    checks = []

    # Pull equals the scaled displacement of the raw average.
    lhs = pull
    rhs = 2.0 * weight_half_sum * (avg - base)
    res = float(np.linalg.norm(lhs - rhs)) / (1.0 + float(np.linalg.norm(pull)))
    checks.append(CertificateCheck(
        "force_identity", "identity", res, 1e-10, res <= 1e-10))

    # Weighted displacement sum equals the scaled projection displacement.
    alpha = _displacement_sum_at(instance, base, q, snap_tol)
    rhs = 2.0 * weight_half_sum * (q - t)
    res = float(np.linalg.norm(alpha - rhs)) / (1.0 + float(np.linalg.norm(alpha)))
    checks.append(CertificateCheck(
        "displacement_identity", "identity", res, IDENTITY_TOL, res <= IDENTITY_TOL))

    # Obtuse angle between the realized move and the projection correction.
    ip = float(np.dot(q - base, q - t))
    checks.append(CertificateCheck(
        "projection_angle", "inequality", ip, INEQUALITY_SLACK, ip <= INEQUALITY_SLACK))

    # Exact expansion of restricted squared distances, all vertices and splits.
    worst = 0.0
    for subset in (tuple(range(instance.dimension)), split.moved, split.fixed):
        for aj in instance.vertices:
            lhs = _norm_on(q - aj, subset) ** 2
            rhs = (
                _norm_on(base - aj, subset) ** 2
                - _norm_on(q - base, subset) ** 2
                + 2.0 * _inner_on(q - base, q - aj, subset)
            )
            worst = max(worst, abs(lhs - rhs))
    checks.append(CertificateCheck(
        "norm_expansion", "identity", worst, IDENTITY_TOL, worst <= IDENTITY_TOL))

    # Surrogate at the current point against its closed form.
    g_at_x = _surrogate_at(instance, base, q, split, base, snap_tol)
    if k is None:
        closed = (
            0.5 * f_x
            + 2.0 * weight_half_sum * float(np.dot(q - base, q - t))
            - weight_half_sum * _norm_on(q - base, split.moved) ** 2
        )
    else:
        closed = 0.5 * f_x
    res = abs(g_at_x - closed) / (1.0 + abs(g_at_x))
    checks.append(CertificateCheck(
        "surrogate_at_current", "identity", res, CLOSED_FORM_RTOL,
        res <= CLOSED_FORM_RTOL))

    # Surrogate at the constrained step against its closed form.
    g_at_q = _surrogate_at(instance, base, q, split, q, snap_tol)
    if k is None:
        closed = (
            0.5 * f_x
            + 2.0 * weight_half_sum * float(np.dot(q - base, q - t))
            - weight_half_sum * step_norm ** 2
        )
    else:
        closed = (
            0.5 * f_x
            - weight_half_sum * step_norm ** 2
            + 2.0 * weight_half_sum * float(np.dot(q - base, q - t))
            - 2.0 * blend * weight_half_sum * float(np.dot(q - base, avg - base))
            + float(instance.weights[k]) * step_norm
        )
    res = abs(g_at_q - closed) / (1.0 + abs(g_at_q))
    checks.append(CertificateCheck(
        "surrogate_at_update", "identity", res, CLOSED_FORM_RTOL,
        res <= CLOSED_FORM_RTOL))

    if k is not None:
        # The distance term and the blended inner-product term cancel exactly.
        z = (
            float(instance.weights[k]) * step_norm
            - 2.0 * weight_half_sum * blend * float(np.dot(q - base, avg - base))
        )
        scale = 1.0 + float(instance.weights[k]) * step_norm
        res = abs(z) / scale
        checks.append(CertificateCheck(
            "vertex_zero_term", "identity", res, CLOSED_FORM_RTOL,
            res <= CLOSED_FORM_RTOL))

    if moved:
        # Surrogate strictly below half the objective once the point moves.
        margin = 0.5 * f_x - g_at_q
        tight = abs(margin) <= TIGHT_RTOL * f_x
        checks.append(CertificateCheck(
            "surrogate_decrease", "inequality", margin, 0.0,
            margin > 0.0 or tight,
            note="degenerate-tight" if tight else "", direction="lower"))
    else:
        checks.append(CertificateCheck(
            "surrogate_decrease", "inequality", 0.0, 0.0, True,
            note="skipped: fixed point", direction="lower"))

    if k is None and moved:
        # Surrogate gap decomposition: second-order remainder is nonnegative.
        d = np.linalg.norm(instance.vertices - base, axis=1)
        dq = np.linalg.norm(instance.vertices - q, axis=1)
        gap = math.fsum(
            w / (2.0 * dj) * (dqj - dj) ** 2
            for w, dj, dqj in zip(instance.weights, d, dq)
        )
        checks.append(CertificateCheck(
            "descent_gap_nonnegative", "inequality", gap, GAP_SLACK,
            gap >= -GAP_SLACK, direction="lower"))
        recomposed = 0.5 * f_x + (f_q - f_x) + gap
        res = abs(g_at_q - recomposed) / (1.0 + abs(g_at_q))
        checks.append(CertificateCheck(
            "descent_gap_identity", "identity", res, CLOSED_FORM_RTOL,
            res <= CLOSED_FORM_RTOL))

    if moved:
        margin = f_x - f_q
        tight = abs(margin) <= TIGHT_RTOL * f_x
        checks.append(CertificateCheck(
            "objective_descent", "inequality", margin, 0.0,
            margin > 0.0 or tight,
            note="degenerate-tight" if tight else "", direction="lower"))
    else:
        checks.append(CertificateCheck(
            "objective_descent", "inequality", 0.0, 0.0, True,
            note="skipped: fixed point", direction="lower"))

    return CertificateReport(point=x, checks=tuple(checks))


def sample_feasible_points(instance, region, count, seed, vertex_share=0.25):
    """Deterministic feasible sample mixing projected draws and vertices.

    Gaussian draws centered at the vertex centroid (scale set by the
    instance diameter) are projected into the region; every few samples a
    feasible vertex is used instead, so vertex branches get exercised.
    """
    rng = np.random.default_rng(seed)
    center = instance.vertices.mean(axis=0)
    scale = 0.75 * (instance.diameter + 1.0)
    feasible_vertices = [
        np.array(v, dtype=float) for v in instance.vertices if region.contains(v)
    ]
    stride = max(1, int(round(1.0 / vertex_share))) if feasible_vertices else 0
    points = []
    for i in range(count):
        if stride and i % stride == 0:
            points.append(feasible_vertices[(i // stride) % len(feasible_vertices)])
            continue
        draw = center + scale * rng.standard_normal(instance.dimension)
        points.append(region.project(draw))
    return points
