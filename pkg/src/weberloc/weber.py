"""Weber objective and the vertex-safe Weiszfeld iteration family.

The Weber function is the weighted sum of Euclidean distances to a fixed set
of vertices.  It is strictly convex when the vertices are not collinear, but
not differentiable at the vertices, which is where the classic Weiszfeld
fixed-point update breaks down.  The functions here implement the vertex-safe
variant of Vardi and Zhang: every quantity has a second branch at the
vertices that simply drops the singular term, and the update blends the
inverse-distance average with the current point so an iterate can leave a
non-optimal vertex.

All sums are accumulated with exact (Shewchuk) summation via ``math.fsum``,
which is order-independent and makes batch runs reproducible bit-for-bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WeberInstance",
    "averaging_weight",
    "force_resultant",
    "instance_from_json",
    "instance_to_json",
    "is_unconstrained_minimum",
    "modified_weiszfeld_step",
    "vertex_blend",
    "vertex_index",
    "weber_value",
    "weiszfeld_average",
]

COLLINEARITY_RTOL = 1e-10  # second singular value threshold, relative to the first


@dataclass(frozen=True)
class WeberInstance:
    """Problem data: m distinct, non-collinear vertices with positive weights.

    Parameters
    ----------
    vertices : array_like, shape (m, n)
        Demand points, m >= 3, affine dimension >= 2.
    weights : array_like, shape (m,)
        Strictly positive weights.

    Attributes
    ----------
    diameter : float
        Maximum pairwise vertex distance.
    snap_tol : float
        Default radius inside which a point is identified with a vertex,
        ``1e-12 * (1 + diameter)``.
    """

    vertices: np.ndarray
    weights: np.ndarray
    diameter: float = field(init=False, compare=False)
    snap_tol: float = field(init=False, compare=False)

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if vertices.ndim != 2:
            raise ValueError("vertices must be a 2-d array of shape (m, n)")
        m, n = vertices.shape
        if m < 3:
            raise ValueError(f"need at least 3 vertices, got {m}")
        if n < 2:
            raise ValueError(f"vertices must live in dimension >= 2, got {n}")
        if weights.shape != (m,):
            raise ValueError(f"weights must have shape ({m},), got {weights.shape}")
        for j, w in enumerate(weights):
            if not w > 0.0:
                raise ValueError(f"weights[{j}] = {w} must be strictly positive")
        diffs = vertices[:, None, :] - vertices[None, :, :]
        dist = np.linalg.norm(diffs, axis=2)
        iu = np.triu_indices(m, k=1)
        pairwise = dist[iu]
        j_min = int(np.argmin(pairwise))
        if pairwise[j_min] == 0.0:
            a, b = iu[0][j_min], iu[1][j_min]
            raise ValueError(f"vertices[{a}] and vertices[{b}] coincide")
        centered = vertices - vertices.mean(axis=0)
        sv = np.linalg.svd(centered, compute_uv=False)
        if sv[1] <= COLLINEARITY_RTOL * sv[0]:
            raise ValueError("vertices are collinear (affine dimension < 2)")
        vertices.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "weights", weights)
        diameter = float(np.max(pairwise))
        object.__setattr__(self, "diameter", diameter)
        object.__setattr__(self, "snap_tol", 1e-12 * (1.0 + diameter))

    @property
    def m(self):
        return self.vertices.shape[0]

    @property
    def dimension(self):
        return self.vertices.shape[1]


def _point(instance, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (instance.dimension,):
        raise ValueError(
            f"point has shape {x.shape}, expected ({instance.dimension},)"
        )
    return x


def _fsum_vector(terms):
    """Componentwise exact sum of an (m, n) array of addends."""
    return np.array([math.fsum(col) for col in terms.T])


def vertex_index(instance, x, snap_tol=None):
    """Index of the vertex that ``x`` coincides with, or ``None``.

    A point within ``snap_tol`` of a vertex is identified with it (unique as
    long as snap_tol is below half the minimum pairwise vertex distance).
    ``snap_tol=None`` uses the instance default.
    """
    x = _point(instance, x)
    if snap_tol is None:
        snap_tol = instance.snap_tol
    if snap_tol < 0:
        raise ValueError("snap_tol must be nonnegative")
    d = np.linalg.norm(instance.vertices - x, axis=1)
    k = int(np.argmin(d))
    return k if d[k] <= snap_tol else None


def weber_value(instance, x):
    """Weighted sum of distances from ``x`` to the vertices."""
    x = _point(instance, x)
    d = np.linalg.norm(instance.vertices - x, axis=1)
    return math.fsum(w * dj for w, dj in zip(instance.weights, d))


def _distances_off_vertex(instance, x, snap_tol):
    """Distances and the index of the matched vertex (dropped from sums)."""
    k = vertex_index(instance, x, snap_tol)
    base = instance.vertices[k] if k is not None else x
    d = np.linalg.norm(instance.vertices - base, axis=1)
    return base, d, k


def averaging_weight(instance, x, snap_tol=None):
    """Half-sum of inverse-distance weights; strictly positive everywhere.

    At a vertex the singular own term is dropped.  This scalar normalizes the
    Weiszfeld average and converts displacements to the force scale.
    """
    _, d, k = _distances_off_vertex(instance, _point(instance, x), snap_tol)
    return math.fsum(
        w / (2.0 * dj)
        for j, (w, dj) in enumerate(zip(instance.weights, d))
        if j != k
    )


def weiszfeld_average(instance, x, snap_tol=None):
    """Inverse-distance weighted average of the vertices (vertex-safe)."""
    x = _point(instance, x)
    _, d, k = _distances_off_vertex(instance, x, snap_tol)
    keep = np.arange(instance.m) != k if k is not None else slice(None)
    coeff = instance.weights[keep] / d[keep]
    num = _fsum_vector(coeff[:, None] * instance.vertices[keep])
    denom = 2.0 * averaging_weight(instance, x, snap_tol)
    return num / denom


def force_resultant(instance, x, snap_tol=None):
    """Weighted sum of unit vectors pulling toward the vertices.

    Away from the vertices this equals the negative gradient of the
    objective; at a vertex the own term is dropped, which yields the
    one-sided analogue used by the vertex-safe update.
    """
    x = _point(instance, x)
    base, d, k = _distances_off_vertex(instance, x, snap_tol)
    keep = np.arange(instance.m) != k if k is not None else slice(None)
    coeff = instance.weights[keep] / d[keep]
    return _fsum_vector(coeff[:, None] * (instance.vertices[keep] - base))


def vertex_blend(instance, x, snap_tol=None):
    """Blend coefficients ``(ratio, blend)`` of the vertex-safe update.

    Away from the vertices both are zero.  At vertex k, ``ratio`` is the
    vertex's own weight divided by the pull norm (zero when the pull
    vanishes) and ``blend = min(1, ratio)`` is the fraction of the update
    that stays put.
    """
    x = _point(instance, x)
    k = vertex_index(instance, x, snap_tol)
    if k is None:
        return 0.0, 0.0
    r = float(np.linalg.norm(force_resultant(instance, x, snap_tol)))
    if r == 0.0:
        return 0.0, 0.0
    ratio = float(instance.weights[k]) / r
    return ratio, min(1.0, ratio)


def modified_weiszfeld_step(instance, x, snap_tol=None):
    """One vertex-safe Weiszfeld update.

    Off the vertices this is the plain inverse-distance average.  At a
    vertex it blends the average with the vertex itself, which keeps the
    update well defined and able to leave a non-optimal vertex.
    """
    x = _point(instance, x)
    k = vertex_index(instance, x, snap_tol)
    base = instance.vertices[k] if k is not None else x
    avg = weiszfeld_average(instance, x, snap_tol)
    _, blend = vertex_blend(instance, x, snap_tol)
    if blend == 0.0:
        return avg
    return (1.0 - blend) * avg + blend * base


def is_unconstrained_minimum(instance, x, tol=0.0, snap_tol=None):
    """Optimality test for the unconstrained problem.

    True iff the pull norm does not exceed the local threshold: zero off the
    vertices, the vertex's own weight at a vertex.  Equivalent to ``x`` being
    a fixed point of the vertex-safe update.
    """
    x = _point(instance, x)
    k = vertex_index(instance, x, snap_tol)
    r = float(np.linalg.norm(force_resultant(instance, x, snap_tol)))
    threshold = float(instance.weights[k]) if k is not None else 0.0
    return r <= threshold + tol


def instance_to_json(instance):
    """Serialize to the documented ``{"vertices": ..., "weights": ...}`` dict."""
    return {
        "vertices": [list(v) for v in instance.vertices],
        "weights": list(instance.weights),
    }


def instance_from_json(obj):
    """Build an instance from its JSON dict (or a JSON string)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        vertices = obj["vertices"]
        weights = obj["weights"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"instance JSON needs 'vertices' and 'weights': {exc}") from exc
    return WeberInstance(np.asarray(vertices, float), np.asarray(weights, float))
