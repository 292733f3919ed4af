"""Independent reference minimizers used to cross-check the solver.

Two deliberately different methods: a dense 2-D grid scan with local
refinement (slow, transparent, with an explicit resolution-times-Lipschitz
error bound) and a projected subgradient method (any dimension, no reliance
on the fixed-point machinery).  Neither shares iteration logic with the
solver, so agreement between them and the solver is meaningful evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .regions import FEASIBILITY_TOL
from .solver import initial_point
from .weber import force_resultant, weber_value

__all__ = ["GridSpec", "grid_oracle", "minimize_on_grid", "projected_subgradient"]


@dataclass(frozen=True)
class GridSpec:
    """Planar search window, initial spacing, and number of 10x refinements."""

    lower: np.ndarray
    upper: np.ndarray
    resolution: float
    refinement_rounds: int = 0

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != (2,) or upper.shape != (2,):
            raise ValueError("grid bounds must be 2-vectors")
        if np.any(lower >= upper):
            raise ValueError("grid bounds must satisfy lower < upper")
        if not self.resolution > 0.0:
            raise ValueError("resolution must be positive")
        if self.refinement_rounds < 0:
            raise ValueError("refinement_rounds must be nonnegative")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "resolution", float(self.resolution))

    @property
    def final_resolution(self):
        return self.resolution / 10.0 ** self.refinement_rounds


def _grid_points(lower, upper, spacing):
    axes = [
        np.linspace(lo, hi, max(2, int(math.ceil((hi - lo) / spacing)) + 1))
        for lo, hi in zip(lower, upper)
    ]
    xx, yy = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


def _best_feasible(region, objective, points, incumbent):
    mask = region.excess_batch(points) <= FEASIBILITY_TOL
    if not np.any(mask):
        return incumbent
    feas = points[mask]
    values = objective(feas)
    i = int(np.argmin(values))
    if incumbent is None or values[i] < incumbent[1]:
        return np.array(feas[i]), float(values[i])
    return incumbent


def _compass_polish(region, objective, x, value, step, step_min, project=False):
    """Pattern search below the grid spacing.

    ``project=False`` keeps candidates by feasibility filtering only (no use
    of the region's projector, so results stay independent of it); the
    stencil rotates at every shrink so non-axis boundaries can be tracked.
    ``project=True`` projects candidates onto the region instead, which
    slides along curved boundaries much faster.
    """
    base = np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False)
    rotation = 0.0
    while step >= step_min:
        angles = base + rotation
        dirs = np.column_stack([np.cos(angles), np.sin(angles)])
        candidates = x + step * dirs
        if project:
            candidates = np.array([region.project(c) for c in candidates])
        mask = region.excess_batch(candidates) <= FEASIBILITY_TOL
        improved = False
        if np.any(mask):
            feas = candidates[mask]
            values = objective(feas)
            i = int(np.argmin(values))
            if values[i] < value:
                x, value = np.array(feas[i]), float(values[i])
                improved = True
        if not improved:
            step *= 0.5
            rotation += 0.37
    return x, value


def minimize_on_grid(region, objective, spec, polish_with_projection=False):
    """Minimize a vectorized objective over the feasible part of a 2-D window.

    Scans the window at the initial spacing, then shrinks a local window
    around the incumbent by a factor of 10 per refinement round, and finally
    polishes with a compass search below the final spacing (projection-free
    unless ``polish_with_projection``).  ``objective`` maps an (N, 2) array
    to N values.

    Returns ``(point, value)``; raises ``ValueError`` when no grid node is
    feasible.
    """
    if region.dimension != 2:
        raise ValueError("grid search is only available in dimension 2")
    best = _best_feasible(
        region, objective, _grid_points(spec.lower, spec.upper, spec.resolution), None
    )
    if best is None:
        raise ValueError("no feasible grid node inside the search window")
    spacing = spec.resolution
    for _ in range(spec.refinement_rounds):
        window = 2.0 * spacing
        spacing /= 10.0
        lower = np.maximum(best[0] - window, spec.lower)
        upper = np.minimum(best[0] + window, spec.upper)
        best = _best_feasible(
            region, objective, _grid_points(lower, upper, spacing), best
        )
    x, value = _compass_polish(
        region, objective, best[0], best[1], spacing, spacing * 1e-3,
        project=polish_with_projection,
    )
    return x, value


def grid_oracle(instance, region, spec):
    """Grid minimizer of the Weber objective over a planar region.

    The returned objective overestimates the true minimum by at most about
    ``L * h`` with ``L`` the weight sum and ``h`` the final spacing.  The
    polish stage slides along the boundary via the region's projector; the
    oracle stays independent of the fixed-point solver it cross-checks.
    """
    if instance.dimension != 2:
        raise ValueError("grid oracle requires a planar instance")

    def objective(points):
        total = np.zeros(points.shape[0])
        for aj, w in zip(instance.vertices, instance.weights):
            total += w * np.linalg.norm(points - aj, axis=1)
        return total

    return minimize_on_grid(region, objective, spec, polish_with_projection=True)


def projected_subgradient(instance, region, steps, step_rule=None, start=None):
    """Projected subgradient descent on the Weber objective.

    Subgradients: the negative pull resultant (the gradient off the
    vertices; at a vertex the minimal-hassle subdifferential element with a
    zero unit-ball component).  The default step rule is ``c / sqrt(l)``
    with ``c`` the vertex-cloud diameter.  Returns the best iterate seen.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    x = initial_point(instance, region) if start is None else np.asarray(start, float)
    if step_rule is None:
        c = instance.diameter

        def step_rule(l):
            return c / math.sqrt(l)

    best_x, best_f = np.array(x), weber_value(instance, x)
    for l in range(1, steps + 1):
        pull = force_resultant(instance, x)
        x = region.project(x + step_rule(l) * pull)
        f = weber_value(instance, x)
        if f < best_f:
            best_x, best_f = np.array(x), f
    return best_x, best_f
