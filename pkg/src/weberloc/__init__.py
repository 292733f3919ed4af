"""Weber location problems on closed convex regions.

A projection-based, vertex-safe Weiszfeld-type fixed-point solver, the
geometry it needs (convex regions with exact and iterative projections), a
certificate layer that numerically verifies the algebra behind the descent
guarantee, independent reference minimizers, and a reproducible benchmark
harness.
"""

from .baselines import GridSpec, grid_oracle, minimize_on_grid, projected_subgradient
from .certificates import (
    CertificateCheck,
    CertificateReport,
    IndexSplit,
    check_certificates,
    displacement_sum,
    index_split,
    surrogate_value,
)
from .estimator import WeberLocator
from .experiments import (
    BatchConfig,
    BatchReport,
    benchmark_region,
    generate_instance,
    run_batch,
    write_reports,
)
from .regions import (
    AffineEquality,
    Ball,
    Box,
    ConvexRegion,
    Halfspace,
    Poly2D,
    ProjectionError,
    SmoothConvexInequality,
    region_from_json,
    region_to_json,
    segment_infimum,
)
from .solver import (
    CONVERGED,
    MAX_ITERATIONS_REACHED,
    SolveResult,
    SolverConfig,
    constrained_step,
    initial_point,
    projected_gradient_residual,
    solve,
    solve_unconstrained,
    vertex_descent_check,
)
from .weber import (
    WeberInstance,
    averaging_weight,
    force_resultant,
    instance_from_json,
    instance_to_json,
    is_unconstrained_minimum,
    modified_weiszfeld_step,
    vertex_blend,
    vertex_index,
    weber_value,
    weiszfeld_average,
)

__version__ = "0.1.0"
