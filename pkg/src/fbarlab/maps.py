"""Measure-preserving maps of tori used as test beds for names and towers.

Every map exposes ``dim``, ``iterate(points, k)`` for integer ``k`` (negative
allowed), ``sample(n, rng)`` from its invariant measure, ``sample_box`` and
``measure_box``.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ._validation import check_points, wrap01
from .boxes import Box
from .errors import InvalidInputError


class TorusMap:
    dim = 3

    def iterate(self, points, k=1):
        raise NotImplementedError

    def step(self, points):
        return self.iterate(points, 1)

    def __call__(self, points):
        return self.iterate(points, 1)

    def sample(self, n, rng):
        return rng.random((n, self.dim))

    def sample_box(self, box: Box, n, rng):
        return box.sample_uniform(n, rng)

    def measure_box(self, box: Box):
        return float(box.volume)

    def orbit(self, points, n):
        """``(n, len(points), dim)`` array of ``T^i p`` for ``0 <= i < n``."""
        pts = check_points(points, self.dim)
        out = np.empty((n,) + pts.shape)
        for i in range(n):
            out[i] = pts
            if i + 1 < n:
                pts = self.step(pts)
        return out


class IdentityMap(TorusMap):
    def __init__(self, dim=3):
        self.dim = dim

    def iterate(self, points, k=1):
        return check_points(points, self.dim).copy()


class Translation(TorusMap):
    """``p -> p + k * v mod 1`` with exact rational or float translation vector ``v``.

    With rational components the offset ``k v mod 1`` is formed exactly, so
    ``T^k`` does not drift for large ``k``.
    """

    def __init__(self, vector):
        self.vector = tuple(vector)
        self.dim = len(self.vector)

    def offset(self, k):
        out = []
        for v in self.vector:
            if isinstance(v, Fraction):
                out.append(((k * v.numerator) % v.denominator) / v.denominator)
            else:
                out.append(float(np.mod(k * v, 1.0)))
        return np.asarray(out)

    def exact_offset(self, k):
        return tuple(Fraction(k) * Fraction(v) % 1 for v in self.vector)

    def iterate(self, points, k=1):
        return wrap01(check_points(points, self.dim) + self.offset(int(k)))

    @classmethod
    def from_rotation(cls, spec, dim=3):
        w = spec.omega
        return cls((w[0], w[1], Fraction(0))[:dim])


class ProductMap(TorusMap):
    """``A x B`` acting on the concatenated coordinates."""

    def __init__(self, first: TorusMap, second: TorusMap):
        self.first, self.second = first, second
        self.dim = first.dim + second.dim

    def _split(self, points):
        pts = check_points(points, self.dim)
        return pts[:, : self.first.dim], pts[:, self.first.dim:]

    def iterate(self, points, k=1):
        a, b = self._split(points)
        return np.hstack([self.first.iterate(a, k), self.second.iterate(b, k)])

    def sample(self, n, rng):
        return np.hstack([self.first.sample(n, rng), self.second.sample(n, rng)])

    def _split_box(self, box):
        if box.dim != self.dim:
            raise InvalidInputError("box dimension does not match the product map")
        d = self.first.dim
        return Box(box.lo[:d], box.length[:d], box.half_open), Box(box.lo[d:], box.length[d:], box.half_open)

    def sample_box(self, box, n, rng):
        a, b = self._split_box(box)
        return np.hstack([self.first.sample_box(a, n, rng), self.second.sample_box(b, n, rng)])

    def measure_box(self, box):
        a, b = self._split_box(box)
        return self.first.measure_box(a) * self.second.measure_box(b)
