"""scikit-learn style wrapper around the location solver.

``WeberLocator`` treats the demand points as the training data ``X`` (one row
per demand point, ``sample_weight`` as the weights) and fits the optimal
facility location, optionally constrained to a convex region.  It follows
the estimator contract (``get_params``/``set_params``, fitted attributes
with trailing underscores, ``transform`` producing distances), so it drops
into pipelines and model-selection tooling unchanged.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import _check_sample_weight, check_array, check_is_fitted

from .solver import SolverConfig, solve, solve_unconstrained
from .weber import WeberInstance

__all__ = ["WeberLocator"]


class WeberLocator(TransformerMixin, BaseEstimator):
    """Weighted geometric-median estimator with convex feasibility constraints.

    Parameters
    ----------
    region : ConvexRegion or None, default=None
        Feasible set for the location.  ``None`` solves the unconstrained
        problem.
    epsilon : float, default=1e-5
        Step-norm stopping tolerance of the fixed-point iteration.
    max_iterations : int, default=100000
    snap_tol : float or None, default=None
        Radius inside which an iterate is identified with a demand point;
        ``None`` uses the instance default.
    record_trace : bool, default=False
        Keep the per-iteration trace on the fitted estimator.

    Attributes
    ----------
    location_ : ndarray of shape (n_features,)
        Fitted optimal location.
    objective_ : float
        Weighted sum of distances at the fitted location.
    n_iter_ : int
    status_ : str
        ``"Converged"`` or ``"MaxIterationsReached"``.
    kkt_residual_ : float
        First-order optimality residual at the fitted location.
    trace_ : list or None
        ``(iterate, objective, step_norm)`` tuples when requested.

    Examples
    --------
    >>> import numpy as np
    >>> from weberloc import WeberLocator
    >>> X = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 2.0]])
    >>> locator = WeberLocator().fit(X)
    >>> locator.location_.shape
    (2,)
    """

    def __init__(self, region=None, epsilon=1e-5, max_iterations=100_000,
                 snap_tol=None, record_trace=False):
        self.region = region
        self.epsilon = epsilon
        self.max_iterations = max_iterations
        self.snap_tol = snap_tol
        self.record_trace = record_trace

    def fit(self, X, y=None, sample_weight=None):
        """Solve the location problem for the demand points in ``X``."""
        X = check_array(X, dtype=np.float64, ensure_min_samples=3,
                        ensure_min_features=2)
        sample_weight = _check_sample_weight(sample_weight, X, dtype=np.float64)
        if np.any(sample_weight <= 0.0):
            raise ValueError("sample_weight entries must be strictly positive")
        instance = WeberInstance(X, sample_weight)
        if self.region is None:
            result = solve_unconstrained(
                instance,
                epsilon=self.epsilon,
                max_iterations=self.max_iterations,
                snap_tol=self.snap_tol,
                record_trace=self.record_trace,
            )
        else:
            config = SolverConfig(
                epsilon=self.epsilon,
                max_iterations=self.max_iterations,
                snap_tol=self.snap_tol,
                record_trace=self.record_trace,
            )
            result = solve(instance, self.region, config)
        self.n_features_in_ = X.shape[1]
        self.location_ = result.solution
        self.objective_ = result.objective
        self.n_iter_ = result.iterations
        self.status_ = result.status
        self.kkt_residual_ = result.kkt_residual
        self.trace_ = result.trace
        return self

    def transform(self, X):
        """Distances from each row of ``X`` to the fitted location, shape (n, 1)."""
        check_is_fitted(self, "location_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return np.linalg.norm(X - self.location_, axis=1)[:, None]

    def score(self, X, y=None, sample_weight=None):
        """Negative weighted sum of distances (greater is better)."""
        check_is_fitted(self, "location_")
        distances = self.transform(X)[:, 0]
        if sample_weight is None:
            sample_weight = np.ones_like(distances)
        return -float(np.sum(np.asarray(sample_weight, dtype=float) * distances))
