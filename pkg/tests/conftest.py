"""Shared helpers: random instances, simple regions, feasible points."""

import numpy as np
import pytest

from weberloc import Ball, Box, ConvexRegion, Halfspace, WeberInstance, benchmark_region


def random_instance(rng, m=5, scale=5.0, weight_max=10.0):
    """Random valid instance; retries the draw on degenerate geometry."""
    for _ in range(50):
        vertices = rng.normal(0.0, scale, size=(m, 2))
        weights = rng.uniform(0.1, weight_max, size=m)
        try:
            return WeberInstance(vertices, weights)
        except ValueError:
            continue
    raise RuntimeError("could not draw a valid instance")


def random_simple_region(rng, instance, kind=None):
    """Halfspace, ball, or box region overlapping the instance's vertex cloud."""
    center = instance.vertices.mean(axis=0)
    if kind is None:
        kind = rng.choice(["halfspace", "ball", "box"])
    if kind == "halfspace":
        normal = rng.standard_normal(2)
        while np.linalg.norm(normal) < 1e-6:
            normal = rng.standard_normal(2)
        offset = float(normal @ center + rng.uniform(-2.0, 2.0))
        return ConvexRegion((Halfspace(normal, offset),), 2)
    if kind == "ball":
        c = center + rng.uniform(-3.0, 3.0, size=2)
        return ConvexRegion((Ball(c, float(rng.uniform(1.0, 10.0))),), 2)
    half = rng.uniform(1.0, 8.0, size=2)
    c = center + rng.uniform(-2.0, 2.0, size=2)
    return ConvexRegion((Box(c - half, c + half),), 2)


def feasible_point(rng, region, center, scale=5.0):
    return region.project(center + scale * rng.standard_normal(region.dimension))


@pytest.fixture(scope="session")
def nine_constraint_region():
    return benchmark_region()


@pytest.fixture
def equilateral():
    """Unit equilateral triangle with unit weights."""
    vertices = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])
    return WeberInstance(vertices, np.ones(3))
