"""Closed convex feasible regions assembled from constraint primitives.

A region is an intersection of primitive constraint sets (halfspaces, balls,
boxes, affine hyperplanes, smooth sublevel sets).  It answers membership
queries, computes the Euclidean projection onto the intersection, and locates
the feasibility infimum along a segment.

Projections onto single primitives are closed form wherever possible.  For
planar intersections of closed-form primitives the projection is computed
exactly: its active set has at most two constraints, so it is either a
distance-stationary point on one boundary curve or a corner, and all of those
are roots of low-degree polynomials.  Intersections in higher dimension, or
involving black-box smooth constraints, use Dykstra's alternating projection
scheme (which, unlike plain cyclic projection, converges to the orthogonal
projection on convex intersections).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AffineEquality",
    "Ball",
    "Box",
    "ConvexRegion",
    "Halfspace",
    "Poly2D",
    "ProjectionError",
    "SmoothConvexInequality",
    "midpoint_convexity_violations",
    "region_from_json",
    "region_to_json",
    "segment_infimum",
    "FEASIBILITY_TOL",
]

FEASIBILITY_TOL = 1e-9
SEGMENT_TOL = 1e-12
DYKSTRA_MAX_SWEEPS = 10_000
DYKSTRA_DISPLACEMENT_TOL = 1e-10


class ProjectionError(RuntimeError):
    """An iterative projection failed to reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _as_vector(x, dim=None, name="vector"):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"{name} has dimension {v.shape[0]}, expected {dim}")
    return v


@dataclass(frozen=True)
class Halfspace:
    """Affine halfspace  <normal, y> <= offset."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = _as_vector(self.normal, name="normal")
        if not np.any(normal != 0.0):
            raise ValueError("halfspace normal must be nonzero")
        normal.setflags(write=False)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dimension(self):
        return self.normal.shape[0]

    def excess(self, y):
        """Constraint value; <= 0 on the feasible side."""
        return float(self.normal @ y - self.offset)

    def excess_batch(self, points):
        return points @ self.normal - self.offset

    def project(self, y):
        e = self.normal @ y - self.offset
        if e <= 0.0:
            return np.array(y, dtype=float)
        return y - (e / (self.normal @ self.normal)) * self.normal


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball of given center and radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = _as_vector(self.center, name="center")
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0.0:
            raise ValueError("ball radius must be positive")

    @property
    def dimension(self):
        return self.center.shape[0]

    def excess(self, y):
        return float(np.linalg.norm(y - self.center) - self.radius)

    def excess_batch(self, points):
        return np.linalg.norm(points - self.center, axis=1) - self.radius

    def project(self, y):
        d = y - self.center
        nd = np.linalg.norm(d)
        if nd <= self.radius:
            return np.array(y, dtype=float)
        return self.center + (self.radius / nd) * d


@dataclass(frozen=True)
class Box:
    """Axis-aligned box  lower <= y <= upper (componentwise)."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _as_vector(self.lower, name="lower")
        upper = _as_vector(self.upper, dim=lower.shape[0], name="upper")
        if np.any(lower > upper):
            raise ValueError("box requires lower <= upper componentwise")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self):
        return self.lower.shape[0]

    def excess(self, y):
        return float(np.max(np.maximum(self.lower - y, y - self.upper)))

    def excess_batch(self, points):
        return np.max(np.maximum(self.lower - points, points - self.upper), axis=1)

    def project(self, y):
        return np.clip(y, self.lower, self.upper)


@dataclass(frozen=True)
class AffineEquality:
    """Affine hyperplane  <normal, y> = offset."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = _as_vector(self.normal, name="normal")
        if not np.any(normal != 0.0):
            raise ValueError("equality normal must be nonzero")
        normal.setflags(write=False)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dimension(self):
        return self.normal.shape[0]

    def excess(self, y):
        """Absolute equation residual; feasible iff ~0."""
        return abs(float(self.normal @ y - self.offset))

    def excess_batch(self, points):
        return np.abs(points @ self.normal - self.offset)

    def project(self, y):
        e = self.normal @ y - self.offset
        return y - (e / (self.normal @ self.normal)) * self.normal


@dataclass(frozen=True)
class SmoothConvexInequality:
    """Sublevel set  value(y) <= 0  of a smooth convex function.

    The caller asserts convexity and differentiability; tests spot-check
    convexity by sampled midpoint evaluations.  Projection solves the
    stationarity system  z = y - mu * gradient(z), value(z) = 0  by a
    safeguarded Newton iteration on the multiplier mu, with the bracket
    [0, mu_max] grown by doubling until it contains the root.
    """

    value: object
    gradient: object
    dim: int

    @property
    def dimension(self):
        return self.dim

    def excess(self, y):
        return float(self.value(y))

    def excess_batch(self, points):
        return np.array([self.value(p) for p in points], dtype=float)

    def _solve_for_point(self, y, mu):
        # Damped Newton on F(z) = z - y + mu * grad(z), finite-difference Jacobian.
        z = np.array(y, dtype=float)
        n = z.shape[0]
        for _ in range(60):
            g = np.asarray(self.gradient(z), dtype=float)
            res = z - y + mu * g
            rn = np.linalg.norm(res)
            if rn <= 1e-13 * (1.0 + np.linalg.norm(z)):
                break
            jac = np.eye(n)
            h = 1e-7 * (1.0 + np.linalg.norm(z))
            for i in range(n):
                dz = np.zeros(n)
                dz[i] = h
                jac[:, i] += mu * (np.asarray(self.gradient(z + dz)) - g) / h
            try:
                step = np.linalg.solve(jac, -res)
            except np.linalg.LinAlgError:
                step = -res
            t = 1.0
            while t > 1e-6:
                zt = z + t * step
                if np.linalg.norm(zt - y + mu * np.asarray(self.gradient(zt))) < rn:
                    break
                t *= 0.5
            z = z + t * step
        return z

    def project(self, y):
        v0 = float(self.value(y))
        if v0 <= 0.0:
            return np.array(y, dtype=float)
        g0 = np.asarray(self.gradient(y), dtype=float)
        gn2 = float(g0 @ g0)
        if gn2 == 0.0:
            raise ProjectionError("zero gradient at an infeasible point", residual=v0)
        # Grow the bracket until the boundary is crossed.
        mu_hi = v0 / gn2
        z_hi = self._solve_for_point(y, mu_hi)
        grow = 0
        while float(self.value(z_hi)) > 0.0:
            mu_hi *= 2.0
            z_hi = self._solve_for_point(y, mu_hi)
            grow += 1
            if grow > 80:
                raise ProjectionError(
                    "could not bracket the projection multiplier",
                    residual=float(self.value(z_hi)),
                )
        mu_lo, mu = 0.0, mu_hi
        z = z_hi
        for _ in range(200):
            v = float(self.value(z))
            if abs(v) <= 1e-12 * (1.0 + abs(v0)):
                break
            if v > 0.0:
                mu_lo = mu
            else:
                mu_hi = mu
            # Newton step on mu using phi'(mu) ~ -|grad(z)|^2, bisection fallback.
            g = np.asarray(self.gradient(z), dtype=float)
            mu_newton = mu + v / max(float(g @ g), 1e-300)
            if mu_lo < mu_newton < mu_hi:
                mu = mu_newton
            else:
                mu = 0.5 * (mu_lo + mu_hi)
            z = self._solve_for_point(y, mu)
            if mu_hi - mu_lo <= 1e-16 * (1.0 + mu_hi):
                break
        if float(self.value(z)) > 1e-9:
            raise ProjectionError(
                "projection onto smooth constraint did not converge",
                residual=float(self.value(z)),
            )
        return z


@dataclass(frozen=True)
class Poly2D:
    """Planar constraint  sign_y * y + c0 + c1*x + c2*x^2 + c3*x^3 <= offset.

    The feasible set is the region on one side of a cubic graph.  Projection
    of an infeasible point lands on the boundary curve; the stationarity
    condition of the distance to the curve is a quintic polynomial whose real
    roots are enumerated exactly (companion-matrix roots), so no iteration is
    involved.
    """

    coeffs_x: tuple
    sign_y: int
    offset: float
    _curve: np.ndarray = field(init=False, repr=False, compare=False)
    _curve_deriv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs_x)
        if len(coeffs) > 4:
            raise ValueError("poly2d supports polynomials of degree <= 3")
        coeffs = coeffs + (0.0,) * (4 - len(coeffs))
        object.__setattr__(self, "coeffs_x", coeffs)
        if self.sign_y not in (-1, 1):
            raise ValueError("sign_y must be +1 or -1")
        object.__setattr__(self, "offset", float(self.offset))
        # Boundary graph Y(X) = sign_y * (offset - p(X)), ascending coefficients.
        curve = -self.sign_y * np.asarray(coeffs)
        curve[0] += self.sign_y * self.offset
        curve.setflags(write=False)
        object.__setattr__(self, "_curve", curve)
        deriv = np.polynomial.polynomial.polyder(curve)
        deriv.setflags(write=False)
        object.__setattr__(self, "_curve_deriv", deriv)

    @property
    def dimension(self):
        return 2

    def boundary_curve(self):
        """The boundary as a polynomial graph Y(X) = sign_y * (offset - p(X))."""
        return np.polynomial.Polynomial(self._curve)

    def excess(self, y):
        c = self.coeffs_x
        px = c[0] + y[0] * (c[1] + y[0] * (c[2] + y[0] * c[3]))
        return float(self.sign_y * y[1] + px - self.offset)

    def excess_batch(self, points):
        px = np.polynomial.polynomial.polyval(points[:, 0], np.asarray(self.coeffs_x))
        return self.sign_y * points[:, 1] + px - self.offset

    def stationary_points(self, y):
        """All distance-stationary points of ``y`` on the boundary curve."""
        # Stationarity of |(X,Y(X)) - y|^2: (X - y0) + (Y(X) - y1) * Y'(X) = 0.
        shifted = self._curve.copy()
        shifted[0] -= y[1]
        coef = np.convolve(shifted, self._curve_deriv)
        coef[0] -= y[0]
        coef[1] += 1.0
        real = _real_roots(coef)
        return np.column_stack(
            [real, np.polynomial.polynomial.polyval(real, self._curve)]
        )

    def project(self, y):
        if self.excess(y) <= 0.0:
            return np.array(y, dtype=float)
        candidates = self.stationary_points(y)
        if candidates.shape[0] == 0:
            raise ProjectionError("no stationary point on the boundary curve")
        d2 = np.sum((candidates - np.asarray(y, float)) ** 2, axis=1)
        return np.array(candidates[int(np.argmin(d2))], dtype=float)


_PRIMITIVES = (Halfspace, Ball, Box, AffineEquality, SmoothConvexInequality, Poly2D)


def _real_roots(coef, imag_tol=1e-9):
    """Real roots of a polynomial given in ascending-coefficient form."""
    coef = np.asarray(coef, dtype=float)
    nz = np.nonzero(np.abs(coef) > 0.0)[0]
    if nz.size == 0 or nz[-1] == 0:
        return np.empty(0)
    roots = np.polynomial.Polynomial(coef[: nz[-1] + 1]).roots()
    return roots[np.abs(roots.imag) <= imag_tol * (1.0 + np.abs(roots.real))].real


def _line_of(c):
    """(normal, offset) of the boundary line of a halfspace or equality."""
    return c.normal, c.offset


def _box_halfspaces(box):
    out = []
    n = box.dimension
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        out.append(Halfspace(-e, -float(box.lower[i])))
        out.append(Halfspace(e, float(box.upper[i])))
    return out


def _expand_2d_faces(constraints):
    """Flatten constraints into smooth 2-D faces; None if some face has none."""
    faces = []
    for c in constraints:
        if isinstance(c, Box):
            faces.extend(_box_halfspaces(c))
        elif isinstance(c, (Halfspace, AffineEquality, Ball, Poly2D)):
            faces.append(c)
        else:
            return None
    return faces


def _face_stationary_points(face, p):
    """All stationary points of the distance from ``p`` on one face boundary."""
    if isinstance(face, (Halfspace, AffineEquality)):
        n, b = _line_of(face)
        return [p - ((n @ p - b) / (n @ n)) * n]
    if isinstance(face, Ball):
        u = p - face.center
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return []
        u = u / nu
        return [face.center + face.radius * u, face.center - face.radius * u]
    if isinstance(face, Poly2D):
        return list(face.stationary_points(p))
    return []


def _line_line(n1, b1, n2, b2):
    a = np.array([n1, n2], dtype=float)
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det) <= 1e-14 * (np.abs(a).max() ** 2 + 1.0):
        return []
    return [np.linalg.solve(a, np.array([b1, b2], dtype=float))]


def _line_circle(n, b, center, radius):
    foot = center - ((n @ center - b) / (n @ n)) * n
    h2 = radius**2 - float((foot - center) @ (foot - center))
    if h2 < 0.0:
        return []
    t = np.array([-n[1], n[0]]) / np.linalg.norm(n)
    h = math.sqrt(max(h2, 0.0))
    return [foot + h * t, foot - h * t]


def _line_curve(n, b, curve):
    # n0*x + n1*Y(x) = b  with Y the polynomial boundary graph.
    P = np.polynomial.Polynomial
    if n[1] == 0.0:
        x = b / n[0]
        return [np.array([x, curve(x)])]
    eq = P([-b, n[0]]) + n[1] * curve
    xs = _real_roots(eq.coef)
    return [np.array([x, curve(x)]) for x in xs]


def _circle_circle(c1, c2):
    d = c2.center - c1.center
    dist = np.linalg.norm(d)
    if dist == 0.0:
        return []
    a = (c1.radius**2 - c2.radius**2 + dist**2) / (2.0 * dist)
    h2 = c1.radius**2 - a**2
    if h2 < 0.0:
        return []
    mid = c1.center + (a / dist) * d
    t = np.array([-d[1], d[0]]) / dist
    h = math.sqrt(max(h2, 0.0))
    return [mid + h * t, mid - h * t]


def _circle_curve(circle, curve):
    P = np.polynomial.Polynomial
    eq = (P([-circle.center[0], 1.0])) ** 2 + (curve - P([circle.center[1]])) ** 2 - P(
        [circle.radius**2]
    )
    xs = _real_roots(eq.coef)
    return [np.array([x, curve(x)]) for x in xs]


def _curve_curve(k1, k2):
    diff = k1.boundary_curve() - k2.boundary_curve()
    xs = _real_roots(diff.coef)
    return [np.array([x, k1.boundary_curve()(x)]) for x in xs]


def _face_intersections(f1, f2):
    """Boundary-curve intersection points of two 2-D faces."""
    lines = (Halfspace, AffineEquality)
    if isinstance(f1, lines) and isinstance(f2, lines):
        return _line_line(*_line_of(f1), *_line_of(f2))
    if isinstance(f1, lines) and isinstance(f2, Ball):
        return _line_circle(*_line_of(f1), f2.center, f2.radius)
    if isinstance(f2, lines) and isinstance(f1, Ball):
        return _line_circle(*_line_of(f2), f1.center, f1.radius)
    if isinstance(f1, lines) and isinstance(f2, Poly2D):
        return _line_curve(*_line_of(f1), f2.boundary_curve())
    if isinstance(f2, lines) and isinstance(f1, Poly2D):
        return _line_curve(*_line_of(f2), f1.boundary_curve())
    if isinstance(f1, Ball) and isinstance(f2, Ball):
        return _circle_circle(f1, f2)
    if isinstance(f1, Ball) and isinstance(f2, Poly2D):
        return _circle_curve(f1, f2.boundary_curve())
    if isinstance(f2, Ball) and isinstance(f1, Poly2D):
        return _circle_curve(f2, f1.boundary_curve())
    if isinstance(f1, Poly2D) and isinstance(f2, Poly2D):
        return _curve_curve(f1, f2)
    return []


@dataclass(frozen=True)
class ConvexRegion:
    """Intersection of convex constraint primitives in R^n.

    Parameters
    ----------
    constraints : sequence of constraint primitives
        All primitives must share the region dimension.
    dimension : int
        Ambient dimension n.

    Nonemptiness is validated at construction by projecting the origin; a
    region that cannot be projected onto raises ``ValueError``.  Instances
    are immutable and safe for concurrent use.
    """

    constraints: tuple
    dimension: int
    _anchor: np.ndarray = field(init=False, repr=False, compare=False)
    _faces_2d: tuple | None = field(init=False, repr=False, compare=False)
    _corners_2d: np.ndarray | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        constraints = tuple(self.constraints)
        if not constraints:
            raise ValueError("a region needs at least one constraint")
        dim = int(self.dimension)
        if dim < 1:
            raise ValueError("dimension must be positive")
        for i, c in enumerate(constraints):
            if not isinstance(c, _PRIMITIVES):
                raise ValueError(f"constraints[{i}] is not a constraint primitive")
            if c.dimension != dim:
                raise ValueError(
                    f"constraints[{i}] has dimension {c.dimension}, region has {dim}"
                )
        object.__setattr__(self, "constraints", constraints)
        object.__setattr__(self, "dimension", dim)
        faces = _expand_2d_faces(constraints) if dim == 2 else None
        object.__setattr__(self, "_faces_2d", tuple(faces) if faces else None)
        object.__setattr__(self, "_corners_2d", self._feasible_corners(faces))
        try:
            anchor = self._project_impl(np.zeros(dim))
        except ProjectionError as exc:
            raise ValueError(
                "region appears empty: projecting the origin failed "
                f"(residual {exc.residual})"
            ) from exc
        if not self.contains(anchor, 1e-6):
            raise ValueError("region appears empty: origin projection is infeasible")
        anchor.setflags(write=False)
        object.__setattr__(self, "_anchor", anchor)

    def _feasible_corners(self, faces):
        # Pairwise boundary intersections are independent of the projected
        # point; keeping only the feasible ones gives the region's corners.
        if not faces or len(faces) < 2:
            return None
        corners = []
        for i in range(len(faces)):
            for j in range(i + 1, len(faces)):
                corners.extend(_face_intersections(faces[i], faces[j]))
        corners = [z for z in corners if np.all(np.isfinite(z))]
        if not corners:
            return np.empty((0, 2))
        corners = np.asarray(corners)
        keep = self.excess_batch(corners) <= FEASIBILITY_TOL
        out = corners[keep]
        out.setflags(write=False)
        return out

    def excesses(self, point):
        """Per-constraint values, each <= 0 (equalities: |residual|) iff feasible."""
        point = _as_vector(point, self.dimension, "point")
        return np.array([c.excess(point) for c in self.constraints])

    def max_excess(self, point):
        return float(np.max(self.excesses(point)))

    def excess_batch(self, points):
        points = np.asarray(points, dtype=float)
        cols = [c.excess_batch(points) for c in self.constraints]
        return np.max(np.column_stack(cols), axis=1)

    def contains(self, point, tol=FEASIBILITY_TOL):
        """True iff every constraint holds within additive slack ``tol``."""
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        return bool(self.max_excess(point) <= tol)

    def project(self, point):
        """Orthogonal projection onto the intersection.

        Returns the nearest feasible point; raises ``ProjectionError`` when
        the inner Dykstra iteration does not settle within its sweep cap.
        """
        point = _as_vector(point, self.dimension, "point")
        return self._project_impl(point)

    def _project_impl(self, point):
        if self.max_excess(point) <= 0.0:
            return np.array(point, dtype=float)
        if len(self.constraints) == 1:
            return self.constraints[0].project(point)
        if self._faces_2d is not None:
            result = self._project_2d_exact(point)
            if result is not None:
                return result
        return self._project_dykstra(point)

    def _project_2d_exact(self, point):
        # The projection satisfies first-order conditions with at most two
        # active constraints in the plane, so it is either a distance-
        # stationary point on one face boundary or an intersection of two
        # face boundaries (a region corner, cached at construction).  All
        # are roots of low-degree polynomials; enumerate them and keep the
        # nearest feasible one.
        point = np.asarray(point, dtype=float)
        # Fast path: a single-face projection that is feasible is optimal,
        # because the face's set contains the region.
        best = None
        for c in self.constraints:
            if c.excess(point) > 0.0:
                z = c.project(point)
                if self.max_excess(z) <= FEASIBILITY_TOL:
                    d = float(np.linalg.norm(z - point))
                    if best is None or d < best[1]:
                        best = (z, d)
        if best is not None:
            return best[0]
        candidates = []
        for f in self._faces_2d:
            candidates.extend(_face_stationary_points(f, point))
        candidates = [z for z in candidates if np.all(np.isfinite(z))]
        if candidates:
            candidates = np.asarray(candidates)
            candidates = candidates[self.excess_batch(candidates) <= FEASIBILITY_TOL]
        else:
            candidates = np.empty((0, 2))
        if self._corners_2d is not None and self._corners_2d.shape[0]:
            candidates = np.vstack([candidates, self._corners_2d])
        if candidates.shape[0] == 0:
            return None
        d2 = np.sum((candidates - point) ** 2, axis=1)
        return np.array(candidates[int(np.argmin(d2))], dtype=float)

    def _project_dykstra(self, point):
        # Dykstra's algorithm with one correction term per constraint.
        x = np.array(point, dtype=float)
        corrections = [np.zeros(self.dimension) for _ in self.constraints]
        for _ in range(DYKSTRA_MAX_SWEEPS):
            x_start = x.copy()
            for i, c in enumerate(self.constraints):
                shifted = x + corrections[i]
                x = c.project(shifted)
                corrections[i] = shifted - x
            if np.linalg.norm(x - x_start) < DYKSTRA_DISPLACEMENT_TOL:
                return x
        raise ProjectionError(
            "Dykstra projection did not settle within "
            f"{DYKSTRA_MAX_SWEEPS} sweeps (last sweep displacement "
            f"{np.linalg.norm(x - x_start):.3e}, max excess {self.max_excess(x):.3e})",
            residual=float(np.linalg.norm(x - x_start)),
        )


def segment_infimum(region, p, q, *, lam_tol=SEGMENT_TOL, feasibility_tol=FEASIBILITY_TOL):
    """Infimum of {lam in [0,1] : (1-lam) p + lam q  is feasible}.

    Requires q feasible, so the set contains 1 and, by convexity, is an
    interval [lam*, 1].  Returns 0 when p itself is feasible; otherwise
    locates lam* by bisection to absolute tolerance ``lam_tol``, rounded to
    the feasible side so the returned parameter yields a feasible point.
    """
    p = _as_vector(p, region.dimension, "p")
    q = _as_vector(q, region.dimension, "q")
    excess_q = region.max_excess(q)
    if excess_q > feasibility_tol:
        raise ValueError("segment endpoint q must be feasible")
    if region.contains(p, feasibility_tol):
        return 0.0
    # Bisect against a slack just above q's own excess, so the boundary is
    # located to full precision even when q carries projection round-off.
    slack = max(excess_q, 0.0) + 1e-13 * (1.0 + abs(excess_q))
    lo, hi = 0.0, 1.0  # point(lo) infeasible, point(hi) feasible
    while hi - lo > lam_tol:
        mid = 0.5 * (lo + hi)
        if region.max_excess((1.0 - mid) * p + mid * q) <= slack:
            hi = mid
        else:
            lo = mid
    return hi


def midpoint_convexity_violations(constraint, lower, upper, samples=2000, seed=0, tol=1e-9):
    """Sampled midpoint-convexity check of a primitive's feasible set.

    Draws point pairs uniformly from the window [lower, upper], keeps pairs
    with both endpoints feasible, and counts midpoints that violate the
    constraint by more than ``tol``.  Returns ``(violations, worst_excess)``.
    """
    rng = np.random.default_rng(seed)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    violations = 0
    worst = -math.inf
    for _ in range(samples):
        a = rng.uniform(lower, upper)
        b = rng.uniform(lower, upper)
        if constraint.excess(a) > 0.0 or constraint.excess(b) > 0.0:
            continue
        e = constraint.excess(0.5 * (a + b))
        worst = max(worst, e)
        if e > tol:
            violations += 1
    return violations, worst


def region_to_json(region):
    """Serialize a region to the documented JSON-compatible dict."""
    out = []
    for c in region.constraints:
        if isinstance(c, Halfspace):
            out.append({"type": "halfspace", "normal": list(c.normal), "offset": c.offset})
        elif isinstance(c, Ball):
            out.append({"type": "ball", "center": list(c.center), "radius": c.radius})
        elif isinstance(c, Box):
            out.append({"type": "box", "lower": list(c.lower), "upper": list(c.upper)})
        elif isinstance(c, AffineEquality):
            out.append(
                {"type": "affine_equality", "normal": list(c.normal), "offset": c.offset}
            )
        elif isinstance(c, Poly2D):
            out.append(
                {
                    "type": "poly2d",
                    "coeffs_x": list(c.coeffs_x),
                    "sign_y": c.sign_y,
                    "offset": c.offset,
                }
            )
        else:
            raise ValueError(
                "smooth callable constraints have no JSON form; "
                "encode them as poly2d or rebuild them programmatically"
            )
    return {"dimension": region.dimension, "constraints": out}


def region_from_json(obj):
    """Build a region from its JSON dict (or a JSON string)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    try:
        dim = int(obj["dimension"])
        raw = obj["constraints"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"region JSON needs 'dimension' and 'constraints': {exc}") from exc
    constraints = []
    for i, c in enumerate(raw):
        try:
            kind = c["type"]
            if kind == "halfspace":
                constraints.append(Halfspace(np.array(c["normal"], float), c["offset"]))
            elif kind == "ball":
                constraints.append(Ball(np.array(c["center"], float), c["radius"]))
            elif kind == "box":
                constraints.append(
                    Box(np.array(c["lower"], float), np.array(c["upper"], float))
                )
            elif kind == "affine_equality":
                constraints.append(
                    AffineEquality(np.array(c["normal"], float), c["offset"])
                )
            elif kind == "poly2d":
                constraints.append(Poly2D(tuple(c["coeffs_x"]), int(c["sign_y"]), c["offset"]))
            else:
                raise ValueError(f"unknown constraint type {kind!r}")
        except (KeyError, TypeError) as exc:
            raise ValueError(f"constraints[{i}]: {exc}") from exc
    return ConvexRegion(tuple(constraints), dim)
