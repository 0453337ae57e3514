"""Axis-aligned boxes on the torus T^d.

Each side is an arc ``[lo, lo + length]`` of the circle, so a side may wrap
through 0.  Endpoints may be floats or :class:`~fractions.Fraction`; exact
endpoints make :meth:`Box.translate` and :meth:`Box.intersects` exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class Box:
    lo: tuple
    length: tuple
    half_open: bool = False

    def __post_init__(self):
        lo = tuple(self.lo)
        length = tuple(self.length)
        if len(lo) != len(length) or not lo:
            raise InvalidInputError("box needs matching, non-empty lo and length")
        for a in length:
            if not 0 <= a <= 1:
                raise InvalidInputError(f"side lengths must lie in [0, 1], got {a}")
        # a full side is the whole circle whatever its starting point
        lo = tuple(0 if s >= 1 else _mod1(a) for a, s in zip(lo, length))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "length", length)

    @classmethod
    def from_bounds(cls, bounds, half_open=False):
        """From ``[(lo, hi), ...]``; ``hi < lo`` means the side wraps."""
        lo, length = [], []
        for a, b in bounds:
            lo.append(a)
            span = b - a
            if span < 0:
                span += 1
            length.append(span if span <= 1 else 1)
        return cls(tuple(lo), tuple(length), half_open)

    @classmethod
    def full(cls, dim):
        return cls((0,) * dim, (1,) * dim)

    @property
    def dim(self):
        return len(self.lo)

    @property
    def volume(self):
        v = 1
        for a in self.length:
            v *= a
        return v

    @property
    def bounds(self):
        return tuple((a, _mod1(a + s) if s < 1 else a + s) for a, s in zip(self.lo, self.length))

    def contains(self, points):
        pts = np.asarray(points, dtype=np.float64)
        if pts.shape[-1] != self.dim:
            raise InvalidInputError(f"expected points of dimension {self.dim}")
        inside = np.ones(pts.shape[:-1], dtype=bool)
        for i, (a, s) in enumerate(zip(self.lo, self.length)):
            if s >= 1:
                continue
            rel = np.mod(pts[..., i] - float(a), 1.0)
            inside &= (rel < float(s)) if self.half_open else (rel <= float(s))
        return inside

    def sample_uniform(self, n, rng):
        u = rng.random((n, self.dim))
        return np.mod(np.asarray(self.lo, dtype=np.float64) + u * np.asarray(self.length, dtype=np.float64), 1.0)

    def translate(self, offset):
        return Box(tuple(a + o for a, o in zip(self.lo, offset)), self.length, self.half_open)

    def pieces(self, axis):
        """The side along ``axis`` split into non-wrapping pieces of ``[0, 1]``."""
        a, s = self.lo[axis], self.length[axis]
        if s >= 1:
            return [(0, 1)]
        b = a + s
        if b <= 1:
            return [(a, b)]
        return [(a, 1), (0, b - 1)]

    def intersects(self, other: "Box"):
        """Exact when the endpoints are fractions; closed sides count touching as overlap."""
        strict = self.half_open and other.half_open
        for axis in range(self.dim):
            hit = False
            for a, b in self.pieces(axis):
                for c, d in other.pieces(axis):
                    lo, hi = max(a, c), min(b, d)
                    if lo < hi or (not strict and lo == hi):
                        hit = True
            if not hit:
                return False
        return True

    def to_dict(self):
        return {"lo": [float(a) for a in self.lo], "length": [float(a) for a in self.length], "half_open": self.half_open}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(tuple(d["lo"]), tuple(d["length"]), bool(d.get("half_open", False)))
        except KeyError as exc:
            raise InvalidInputError(f"box description is missing {exc}") from None


def _mod1(a):
    if isinstance(a, Fraction):
        return a - (a.numerator // a.denominator)
    return float(np.mod(a, 1.0)) if a < 0 or a >= 1 else a


def parse_box(text, dim=3):
    """``"x0,x1,y0,y1,z0,z1"`` to a :class:`Box`."""
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InvalidInputError(f"cannot parse box {text!r}") from None
    if len(vals) != 2 * dim:
        raise InvalidInputError(f"box needs {2 * dim} numbers, got {len(vals)}")
    return Box.from_bounds(list(zip(vals[0::2], vals[1::2])))
