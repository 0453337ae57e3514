"""Thin scikit-learn style wrappers over the functional API.

Only the parts that fit the ``fit`` / ``transform`` shape are wrapped: the
time-one map as a transformer of points, P-name encoding, and the Monte
Carlo estimators as ``fit``-then-read-attributes objects.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_points, check_positive_int
from .boxes import Box
from .diagnostics import correlation
from .flow import TimeOneMap
from .roof import assemble_roof, build_P_mu_n
from .rotation import RotationSpec
from .symbolic import CubePartition, estimate_property_P, p_names


class NormalizedTimeOneMap(TransformerMixin, BaseEstimator):
    """``G^steps`` for the roof ``phi_0`` truncated at ``depth`` (with optional plateau substitutions).

    ``substitutions`` maps an index to ``mu``; each entry replaces ``X_index``
    by the plateau polynomial ``P_{mu, index}``.
    """

    def __init__(self, pq_x=(2, 3, 5), pq_y=(3, 4, 6), depth=2, substitutions=None, steps=1, phi_at="image", precision_bits=128):
        self.pq_x = pq_x
        self.pq_y = pq_y
        self.depth = depth
        self.substitutions = substitutions
        self.steps = steps
        self.phi_at = phi_at
        self.precision_bits = precision_bits

    def fit(self, X=None, y=None):
        self.spec_ = RotationSpec(tuple(self.pq_x), tuple(self.pq_y), self.precision_bits)
        subs = {int(k): build_P_mu_n(int(k), float(mu), self.spec_) for k, mu in (self.substitutions or {}).items()}
        self.roof_ = assemble_roof(self.spec_, None, subs, self.depth)
        self.map_ = TimeOneMap.build(self.roof_, self.spec_, phi_at=self.phi_at)
        return self

    def transform(self, X):
        return self.map_.iterate(check_points(X, 3), int(self.steps))

    def inverse_transform(self, X):
        return self.map_.iterate(check_points(X, 3), -int(self.steps))

    def sample(self, n, seed=None):
        return self.map_.sample(n, np.random.default_rng(seed))


class PNameEncoder(TransformerMixin, BaseEstimator):
    """Points of T^3 to their length-``n`` names with respect to the level-``level`` cube partition."""

    def __init__(self, transformation=None, level=1, n=16):
        self.transformation = transformation
        self.level = level
        self.n = n

    def fit(self, X=None, y=None):
        if self.transformation is None:
            raise ValueError("PNameEncoder needs a transformation")
        self.partition_ = CubePartition(self.level, self.transformation.dim)
        self.n_ = check_positive_int(self.n, "n")
        return self

    def transform(self, X):
        return p_names(self.transformation, self.partition_, X, self.n_)


class PropertyPEstimator(BaseEstimator):
    """Monte Carlo certificate for ``P(alpha, delta, n)``; results in ``report_``."""

    def __init__(self, transformation=None, level=1, alpha=0.1, delta=0.1, n=32, samples=1000, centers=10, seed=0):
        self.transformation = transformation
        self.level = level
        self.alpha = alpha
        self.delta = delta
        self.n = n
        self.samples = samples
        self.centers = centers
        self.seed = seed

    def fit(self, X=None, y=None):
        """``X``, when given, replaces sampling from the invariant measure."""
        sampler = None
        if X is not None:
            pts = check_points(X, self.transformation.dim)
            sampler = lambda k, rng: pts[rng.choice(len(pts), size=min(k, len(pts)), replace=False)]  # noqa: E731
        part = CubePartition(self.level, self.transformation.dim)
        self.report_ = estimate_property_P(self.transformation, part, self.alpha, self.delta, self.n,
                                           samples=self.samples, centers=self.centers, seed=self.seed, sampler=sampler)
        return self

    def score(self, X=None, y=None):
        return self.report_.best_fraction


class CorrelationEstimator(BaseEstimator):
    """Correlation decay between two boxes; results in ``series_``."""

    def __init__(self, transformation=None, A=None, B=None, lags=(0, 1, 2, 4, 8), samples=10**5, seed=0):
        self.transformation = transformation
        self.A = A
        self.B = B
        self.lags = lags
        self.samples = samples
        self.seed = seed

    def fit(self, X=None, y=None):
        A = self.A if isinstance(self.A, Box) else Box.from_dict(self.A)
        B = self.B if isinstance(self.B, Box) else Box.from_dict(self.B)
        self.series_ = correlation(self.transformation, A, B, self.lags, self.samples, self.seed)
        return self
