"""Circle and two-torus rotations specified by partial quotients.

A rotation angle is the finite continued fraction ``[0; a_1, ..., a_N]``, so
it is the rational ``p_N / q_N`` and every orbit offset ``m * Omega mod 1`` can
be computed exactly with integer arithmetic.  Floats only appear when a
result is handed to numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from ._validation import wrap01
from .errors import InvalidInputError

DEFAULT_PRECISION_BITS = 256


def convergents(quotients):
    """Numerators and denominators ``(p_n, q_n)`` for ``n = 0..N`` of ``[0; a_1, ..., a_N]``."""
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    ps, qs = [p], [q]
    for a in quotients:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        ps.append(p)
        qs.append(q)
    return tuple(ps), tuple(qs)


def _check_quotients(pq, name):
    pq = tuple(pq)
    if not pq:
        raise InvalidInputError(f"{name} must contain at least one partial quotient")
    for a in pq:
        if isinstance(a, bool) or int(a) != a or a < 1:
            raise InvalidInputError(f"{name} entries must be integers >= 1, got {a!r}")
    return tuple(int(a) for a in pq)


@dataclass(frozen=True)
class RotationSpec:
    """Rotation vector ``omega = (Omega, Omega')`` of the two-torus.

    ``q_x[n]`` and ``q_y[n]`` are the convergent denominators of ``Omega`` and
    ``Omega'`` (``q_0 = 1``); ``beta_x[n] = |q_n Omega - p_n|`` is stored as an
    ``mpmath.mpf`` at ``precision_bits``.
    """

    pq_x: tuple
    pq_y: tuple
    precision_bits: int = DEFAULT_PRECISION_BITS
    p_x: tuple = field(init=False, repr=False)
    q_x: tuple = field(init=False, repr=False)
    p_y: tuple = field(init=False, repr=False)
    q_y: tuple = field(init=False, repr=False)
    beta_x: tuple = field(init=False, repr=False)
    beta_y: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "pq_x", _check_quotients(self.pq_x, "pq_x"))
        object.__setattr__(self, "pq_y", _check_quotients(self.pq_y, "pq_y"))
        if int(self.precision_bits) < 64:
            raise InvalidInputError("precision_bits must be >= 64")
        object.__setattr__(self, "precision_bits", int(self.precision_bits))
        for axis, pq in (("x", self.pq_x), ("y", self.pq_y)):
            ps, qs = convergents(pq)
            object.__setattr__(self, f"p_{axis}", ps)
            object.__setattr__(self, f"q_{axis}", qs)
            limit = Fraction(ps[-1], qs[-1])
            with mpmath.workprec(self.precision_bits):
                betas = tuple(
                    mpmath.mpf(abs(q * limit - p).numerator) / abs(q * limit - p).denominator
                    for p, q in zip(ps, qs)
                )
            object.__setattr__(self, f"beta_{axis}", betas)

    # -- convenience views -------------------------------------------------
    @property
    def q(self):
        return self.q_x

    @property
    def q_prime(self):
        return self.q_y

    @property
    def omega(self):
        """Exact rotation vector as a pair of :class:`~fractions.Fraction`."""
        return (Fraction(self.p_x[-1], self.q_x[-1]), Fraction(self.p_y[-1], self.q_y[-1]))

    @property
    def omega_float(self):
        return tuple(float(w) for w in self.omega)

    def omega_mp(self):
        with mpmath.workprec(self.precision_bits):
            return tuple(mpmath.mpf(w.numerator) / w.denominator for w in self.omega)

    def axis_fraction(self, axis):
        return self.omega[_axis_index(axis)]

    def return_times(self, axis="x"):
        """First return times defined by minimality (a repeated ``q_1 = q_0`` is dropped)."""
        qs = self.q_x if _axis_index(axis) == 0 else self.q_y
        out = [qs[0]]
        for q in qs[1:]:
            if q != out[-1]:
                out.append(q)
        return tuple(out)

    def offsets(self, m, axis="x"):
        """``m * Omega mod 1`` as float64, computed exactly then rounded once.

        ``m`` may be an integer or an integer array.
        """
        w = self.axis_fraction(axis)
        p, q = w.numerator, w.denominator
        if np.ndim(m) == 0:
            return ((int(m) * p) % q) / q
        m = np.asarray(m)
        if q < 2**31 and (m.size == 0 or np.max(np.abs(m)) < 2**31):
            return np.mod(m.astype(np.int64) * p, q) / q
        flat = [((int(k) * p) % q) / q for k in m.ravel()]
        return np.asarray(flat, dtype=np.float64).reshape(m.shape)

    def to_dict(self):
        return {
            "pq_x": list(self.pq_x),
            "pq_y": list(self.pq_y),
            "precision_bits": self.precision_bits,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(tuple(data["pq_x"]), tuple(data["pq_y"]), int(data.get("precision_bits", DEFAULT_PRECISION_BITS)))
        except KeyError as exc:
            raise InvalidInputError(f"rotation spec is missing field {exc}") from None


def _axis_index(axis):
    if axis in ("x", 0):
        return 0
    if axis in ("y", 1):
        return 1
    raise InvalidInputError(f"axis must be 'x' or 'y', got {axis!r}")


def build_rotation(pq_x: Sequence[int], pq_y: Sequence[int], precision_bits: int = DEFAULT_PRECISION_BITS) -> RotationSpec:
    return RotationSpec(tuple(pq_x), tuple(pq_y), precision_bits)


def dist_to_integers(x):
    """Distance to the closest integer, for floats, arrays, fractions or mpf values."""
    if isinstance(x, Fraction):
        r = x - math.floor(x)
        return min(r, 1 - r)
    if isinstance(x, mpmath.mpf):
        r = x - mpmath.floor(x)
        return min(r, 1 - r)
    if isinstance(x, (int, np.integer)):
        return 0.0
    arr = np.asarray(x, dtype=np.float64)
    r = np.abs(arr - np.round(arr))
    return float(r) if r.ndim == 0 else r


# -- growth conditions ------------------------------------------------------

@dataclass(frozen=True)
class GrowthModel:
    """``mode='paper'`` demands ``q'_n >= e^{3 q_n}`` and ``q_{n+1} >= e^{3 q'_n}``;
    ``mode='surrogate'`` replaces the exponentials by a growth factor ``g``."""

    mode: str = "surrogate"
    g: float = 10.0

    def __post_init__(self):
        if self.mode not in ("paper", "surrogate"):
            raise InvalidInputError(f"unknown growth mode {self.mode!r}")
        if self.mode == "surrogate" and not self.g > 1:
            raise InvalidInputError("surrogate growth factor g must exceed 1")

    def threshold(self, q):
        if self.mode == "paper":
            return mpmath.e ** (3 * q)
        return self.g * q


@dataclass(frozen=True)
class GrowthCheck:
    relation: str
    lhs: int
    rhs: float
    passed: bool


@dataclass(frozen=True)
class GrowthLevel:
    n: int
    checks: tuple
    skipped: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


def check_growth(spec: RotationSpec, model: GrowthModel, depth: int):
    """Evaluate the growth inequalities at levels ``1..depth``.

    An inequality whose right-hand index is beyond the supplied quotients is
    listed in ``skipped`` rather than failed.
    """
    available = min(len(spec.q_x), len(spec.q_y)) - 1
    if depth < 0 or depth > available:
        raise InvalidInputError(f"depth must lie in [0, {available}], got {depth}")
    levels = []
    with mpmath.workprec(spec.precision_bits):
        for n in range(1, depth + 1):
            checks, skipped = [], []
            qn, qpn = spec.q_x[n], spec.q_y[n]
            rhs = model.threshold(qn)
            checks.append(GrowthCheck(f"q'_{n} >= T(q_{n})", qpn, float(rhs), bool(qpn >= rhs)))
            if n + 1 < len(spec.q_x):
                rhs = model.threshold(qpn)
                checks.append(GrowthCheck(f"q_{n + 1} >= T(q'_{n})", spec.q_x[n + 1], float(rhs), bool(spec.q_x[n + 1] >= rhs)))
            else:
                skipped.append(f"q_{n + 1} >= T(q'_{n})")
            levels.append(GrowthLevel(n, tuple(checks), tuple(skipped)))
    return levels


def surrogate_rotation(g, depth, first=(2,), precision_bits=DEFAULT_PRECISION_BITS):
    """Smallest-quotient rotation with ``q'_n >= g q_n`` and ``q_{n+1} >= g q'_n``.

    ``first`` seeds the leading x-quotients; later quotients are chosen
    greedily as the least values meeting the surrogate inequalities for
    levels ``1..depth``.
    """
    pq_x = list(first)
    if not pq_x:
        raise InvalidInputError("first must contain at least one quotient")
    pq_y = []
    _, qx = convergents(pq_x)
    _, qy = convergents(pq_y)
    for n in range(1, depth + 1):
        pq_y.append(_least_quotient(qy, g * qx[n]))
        _, qy = convergents(pq_y)
        if len(qx) <= n + 1:
            pq_x.append(_least_quotient(qx, g * qy[n]))
            _, qx = convergents(pq_x)
    return RotationSpec(tuple(pq_x), tuple(pq_y), precision_bits)


def _least_quotient(qs, target):
    prev = qs[-2] if len(qs) > 1 else 0
    a = math.ceil((target - prev) / qs[-1])
    return max(1, a)


# -- iteration ---------------------------------------------------------------

def rotate(point, spec: RotationSpec, m: int):
    """``point + m * omega mod 1`` in ``precision_bits`` arithmetic.

    ``point`` has one or two coordinates; the result is a tuple of
    ``mpmath.mpf``.  The offset ``m * omega mod 1`` is exact, so the only
    rounding is the final addition.
    """
    coords = tuple(point) if np.ndim(point) else (point,)
    if not 1 <= len(coords) <= 2:
        raise InvalidInputError("rotate supports points of T^1 and T^2")
    out = []
    with mpmath.workprec(spec.precision_bits):
        for axis, c in enumerate(coords):
            w = spec.omega[axis]
            off = Fraction((int(m) * w.numerator) % w.denominator, w.denominator)
            val = _to_mpf(c) + mpmath.mpf(off.numerator) / off.denominator
            out.append(val - mpmath.floor(val))
    return tuple(out)


def _to_mpf(c):
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    return mpmath.mpf(c)


def rotate_array(points, spec: RotationSpec, m):
    """Vectorised float64 rotation of ``(n, 2)`` points (or ``(n,)`` x-coordinates).

    ``m`` may be a scalar or an array broadcastable against the points.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        return wrap01(pts + spec.offsets(m, "x"))
    out = np.empty_like(pts)
    out[..., 0] = wrap01(pts[..., 0] + spec.offsets(m, "x"))
    out[..., 1] = wrap01(pts[..., 1] + spec.offsets(m, "y"))
    return out
