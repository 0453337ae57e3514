from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate with its standard error and sample count."""

    value: float
    se: float
    n: int

    def within(self, other: "Estimate", k=3.0):
        return abs(self.value - other.value) <= k * math.hypot(self.se, other.se)

    def to_dict(self):
        return {"value": self.value, "se": self.se, "n": self.n}


def bernoulli_estimate(hits, n, scale=1.0):
    p = hits / n
    return Estimate(scale * p, scale * math.sqrt(max(p * (1 - p), 0.0) / n), int(n))


def mean_estimate(values, scale=1.0):
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return Estimate(scale * float(np.mean(values)), scale * se, int(n))


def stream(seed, label):
    """Independent generator for one estimator, keyed by a stable label."""
    if isinstance(seed, np.random.Generator):
        return seed
    seed = 0 if seed is None else int(seed)
    return np.random.default_rng(np.random.SeedSequence([seed % 2**64, zlib.crc32(label.encode())]))


def two_sum(a, b):
    """Error-free transformation ``a + b = s + e``; works elementwise on arrays."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e
