"""Special flows over the translation R_omega of T^2 and their normalised time-one maps.

A point of the suspension is a base point ``b`` in T^2 and a height
``0 <= s < phi(b)``.  Flowing for time ``t`` climbs the fibre and, at each
roof crossing, moves the base by ``omega``:

    Psi^t(b, s) = (b + pi * omega, s + t - S_pi phi(b)),
    pi = max{n : S_n phi(b) <= s + t}.

The normalisation ``Phi`` identifies T^3 with the suspension, and
``G = Phi^{-1} o Psi^1 o Phi`` is a homeomorphism of T^3 preserving the
measure with density ``phi(base point) / int phi``.

All kernels are vectorised over points.  Base points are always formed as
``b_0 + (exact offset of n omega)`` so long flows do not drift, and the
remaining height is carried as an unevaluated sum ``hi + lo`` (error-free
transformations) so repeated subtraction of roof values does not lose bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._stats import Estimate, bernoulli_estimate, two_sum
from ._validation import check_points, check_positive_int, wrap01
from .boxes import Box
from .errors import CapExceededError, InvalidInputError, InvalidRoofError
from .maps import TorusMap
from .roof import RoofFunction, SeparableFunction
from .rotation import RotationSpec

DEFAULT_CAP = 10**7
CANONICAL_TOL = 1e-14
_MAX_CELLS = 1 << 21  # roof evaluations per vectorised chunk


@dataclass(frozen=True)
class FlowPoint:
    x: float
    y: float
    s: float

    @property
    def base(self):
        return (self.x, self.y)


class SpecialFlow:
    """Suspension flow over ``R_omega`` under ``roof``.

    ``phi_at`` selects the normalisation: ``"image"`` uses
    ``Phi(x, y, z) = (x + Omega, y + Omega', z phi(x + Omega, y + Omega'))``,
    ``"source"`` uses ``Phi(x, y, z) = (x, y, z phi(x, y))``.
    """

    def __init__(self, roof: SeparableFunction, spec: RotationSpec, *, phi_at="image", cap=DEFAULT_CAP, tol=CANONICAL_TOL):
        if phi_at not in ("image", "source"):
            raise InvalidInputError(f"phi_at must be 'image' or 'source', got {phi_at!r}")
        self.roof = roof
        self.spec = spec
        self.phi_at = phi_at
        self.cap = check_positive_int(cap, "cap")
        self.tol = float(tol)
        self.omega = np.asarray(spec.omega_float)
        self.mean = float(roof.mean)
        self._sup = float(roof.sup_bound())
        lo, _ = _grid_min(roof)
        if not lo > 0:
            raise InvalidRoofError(f"roof is not positive (grid minimum {lo:.6g})", value=lo)
        self._lower = lo

    # -- rotation helpers -------------------------------------------------
    def _offsets(self, n):
        n = np.asarray(n, dtype=np.int64)
        return np.stack([self.spec.offsets(n, "x"), self.spec.offsets(n, "y")], axis=-1)

    def _shift(self, base, n):
        """``base + n omega`` with ``n`` an integer array aligned with ``base``."""
        return wrap01(base + self._offsets(n))

    def phi(self, base):
        return self.roof(base)

    # -- the flow ---------------------------------------------------------
    def _advance(self, base, hi, lo, t, direction):
        """Consume ``hi + lo + t`` along the fibres ``base + j * direction * omega``.

        Returns ``(count, rem_hi, rem_lo)`` with ``count`` the number of
        roof crossings and ``rem = hi + lo + t - S_count``.
        """
        n = base.shape[0]
        hi, e = two_sum(hi, t)
        lo = lo + e
        count = np.zeros(n, dtype=np.int64)
        active = np.arange(n)
        while active.size:
            need = float(np.max(hi[active] + lo[active]))
            width = int(min(max(2, math.ceil(need / self._lower) + 2), max(2, _MAX_CELLS // max(1, active.size))))
            if int(np.max(count[active])) + width > self.cap + 1:
                width = max(1, self.cap + 1 - int(np.max(count[active])))
            steps = count[active][:, None] + np.arange(width)[None, :]
            pts = self._shift(np.repeat(base[active], width, axis=0), (direction * steps).reshape(-1))
            phis = self.roof(pts).reshape(active.size, width)
            csum = np.cumsum(phis, axis=1)
            rem = hi[active] + lo[active]
            passed = np.sum(csum <= (rem + self.tol)[:, None], axis=1)
            full = passed == width
            # consumed chunk totals, subtracted with error-free transformations
            took = np.where(passed > 0, csum[np.arange(active.size), np.maximum(passed - 1, 0)], 0.0)
            h2, e2 = two_sum(hi[active], -took)
            hi[active] = h2
            lo[active] = lo[active] + e2
            count[active] += passed
            if np.any(count[active] > self.cap):
                raise CapExceededError(f"return count exceeded the cap of {self.cap}")
            active = active[full]
        return count, hi, lo

    def return_count(self, t, base, s):
        """``pi(t, b, s) = max{n : S_n phi(b) <= s + t}`` for ``t >= 0`` (vectorised)."""
        base = check_points(base, 2, "base")
        t = np.broadcast_to(np.asarray(t, dtype=np.float64), (base.shape[0],)).copy()
        if np.any(t < 0):
            raise InvalidInputError("return_count needs t >= 0")
        s = np.broadcast_to(np.asarray(s, dtype=np.float64), (base.shape[0],)).copy()
        count, _, _ = self._advance(base, s, np.zeros_like(s), t, 1)
        return count

    def flow(self, t, base, s):
        """``Psi^t`` on arrays; negative ``t`` flows backwards via the reflected fibre."""
        base = check_points(base, 2, "base")
        n = base.shape[0]
        t = np.broadcast_to(np.asarray(t, dtype=np.float64), (n,)).copy()
        s = np.broadcast_to(np.asarray(s, dtype=np.float64), (n,)).copy()
        out_b = np.empty_like(base)
        out_s = np.empty(n)
        fwd = t >= 0
        if np.any(fwd):
            b, h = base[fwd], s[fwd]
            count, hi, lo = self._advance(b, h.copy(), np.zeros_like(h), t[fwd], 1)
            out_b[fwd] = self._shift(b, count)
            out_s[fwd] = np.maximum(hi + lo, 0.0)
        if np.any(~fwd):
            b = base[~fwd]
            # backwards in (b, s) is forwards in (b, phi(b) - s) along -omega
            hi, lo = two_sum(self.roof(b), -s[~fwd])
            count, hi, lo = self._advance(b, hi, lo, -t[~fwd], -1)
            nb = self._shift(b, -count)
            ns = self.roof(nb) - (hi + lo)
            out_b[~fwd] = nb
            out_s[~fwd] = ns
        return self.canonicalize(out_b, out_s)

    def canonicalize(self, base, s):
        """Wrap heights within ``tol`` of the roof (or slightly negative) into ``[0, phi)``."""
        base = np.array(base, dtype=np.float64)
        s = np.array(s, dtype=np.float64)
        for _ in range(4):
            phi = self.roof(base)
            over = s >= phi - self.tol
            under = s < 0
            if not (np.any(over) or np.any(under)):
                break
            if np.any(over):
                s[over] = np.maximum(s[over] - phi[over], 0.0)
                base[over] = self._shift(base[over], np.ones(int(over.sum()), dtype=np.int64))
            if np.any(under):
                nb = self._shift(base[under], -np.ones(int(under.sum()), dtype=np.int64))
                s[under] = s[under] + self.roof(nb)
                base[under] = nb
        return base, s

    # -- normalisation ------------------------------------------------------
    def to_suspension(self, points):
        """``Phi``: T^3 -> suspension."""
        pts = check_points(points, 3)
        base = pts[:, :2]
        if self.phi_at == "image":
            base = self._shift(base, np.ones(len(pts), dtype=np.int64))
        return base, pts[:, 2] * self.roof(base)

    def from_suspension(self, base, s):
        """``Phi^{-1}``."""
        z = s / self.roof(base)
        z = np.where(z >= 1.0, np.nextafter(1.0, 0.0), np.maximum(z, 0.0))
        if self.phi_at == "image":
            base = self._shift(base, -np.ones(len(base), dtype=np.int64))
        return np.column_stack([base, z])

    def time_map(self, points, t=1.0):
        """``Phi^{-1} o Psi^t o Phi``; ``t = k`` integer gives ``G^k``."""
        base, s = self.to_suspension(points)
        nb, ns = self.flow(t, base, s)
        return self.from_suspension(nb, ns)

    def orbit(self, point, steps):
        """``G^i(point)`` for ``0 <= i <= steps`` of a single point, shape ``(steps + 1, 3)``.

        One pass along the base orbit with compensated prefix sums of the
        roof, then a search for the crossing index of each integer time.
        """
        steps = check_positive_int(steps, "steps", minimum=0)
        base, s0 = self.to_suspension(point)
        base, s0 = base[0], float(s0[0])
        targets = s0 + np.arange(steps + 1, dtype=np.float64)
        prefix = [np.zeros(1)]
        carry_hi, carry_lo, done = 0.0, 0.0, 0
        block = 1 << 16
        while carry_hi + carry_lo <= targets[-1] + self.tol:
            if done > self.cap:
                raise CapExceededError(f"orbit needs more than {self.cap} roof crossings")
            n = np.arange(done, done + block)
            phis = self.roof(self._shift(np.repeat(base[None, :], block, axis=0), n))
            part = np.cumsum(phis)
            prefix.append(carry_hi + (part + carry_lo))
            carry_hi, e = two_sum(carry_hi, part[-1])
            carry_lo += e
            done += block
        S = np.concatenate(prefix)
        pi = np.searchsorted(S, targets + self.tol, side="right") - 1
        pi = np.maximum(pi, 0)
        heights = np.maximum(targets - S[pi], 0.0)
        bases = self._shift(np.repeat(base[None, :], steps + 1, axis=0), pi)
        nb, ns = self.canonicalize(bases, heights)
        return self.from_suspension(nb, ns)

    # -- invariant measure ------------------------------------------------
    def density(self, points):
        """Density of the invariant measure of ``G`` against Lebesgue on T^3."""
        pts = check_points(points, 3)
        base = pts[:, :2]
        if self.phi_at == "image":
            base = self._shift(base, np.ones(len(pts), dtype=np.int64))
        return self.roof(base) / self.mean

    def measure_box(self, box: Box):
        """Exact invariant measure of a box, integrating the roof over the base rectangle."""
        (x0, lx), (y0, ly), (_, lz) = ((float(a), float(s)) for a, s in zip(box.lo, box.length))
        if self.phi_at == "image":
            x0, y0 = x0 + self.omega[0], y0 + self.omega[1]
        return lz * self.roof.rectangle_integral(x0, x0 + lx, y0, y0 + ly) / self.mean

    def sample(self, n, rng):
        """``n`` points from the invariant measure (rejection against ``sup phi``)."""
        return self.sample_box(Box.full(3), n, rng)

    def sample_box(self, box: Box, n, rng):
        """Points from the invariant measure conditioned on ``box``."""
        n = int(n)
        out = np.empty((0, 3))
        bound = self._sup / self.mean
        while out.shape[0] < n:
            want = max(64, int(1.3 * (n - out.shape[0]) * bound * self.mean / self._lower) + 16)
            cand = box.sample_uniform(min(want, 1 << 20), rng)
            keep = rng.random(cand.shape[0]) * bound < self.density(cand)
            out = np.vstack([out, cand[keep]])
        return out[:n]


def _grid_min(roof, side=100):
    if isinstance(roof, RoofFunction):
        return roof.grid_minimum(side * side)
    g = np.arange(side) / side
    X, Y = np.meshgrid(g, g, indexing="ij")
    vals = roof(np.stack([X, Y], axis=-1))
    i = np.unravel_index(int(np.argmin(vals)), vals.shape)
    return float(vals[i]), (float(g[i[0]]), float(g[i[1]]))


class TimeOneMap(TorusMap):
    """The normalised time-one map ``G_{omega, phi}`` as a :class:`TorusMap`."""

    dim = 3

    def __init__(self, flow: SpecialFlow):
        self.flow = flow

    @classmethod
    def build(cls, roof, spec, **kwargs):
        return cls(SpecialFlow(roof, spec, **kwargs))

    def iterate(self, points, k=1):
        pts = check_points(points, 3)
        if k == 0:
            return pts.copy()
        return self.flow.time_map(pts, float(k))

    def sample(self, n, rng):
        return self.flow.sample(n, rng)

    def sample_box(self, box, n, rng):
        return self.flow.sample_box(box, n, rng)

    def measure_box(self, box):
        return self.flow.measure_box(box)

    def density(self, points):
        return self.flow.density(points)


# -- functional interface --------------------------------------------------

def return_count(t, x, y, s, roof, spec, *, cap=DEFAULT_CAP):
    """Scalar ``pi(t, (x, y), s)``."""
    fl = SpecialFlow(roof, spec, cap=cap)
    phi = float(fl.roof(np.array([[x, y]]))[0])
    if not 0 <= s < phi:
        raise InvalidInputError(f"height {s} is outside [0, phi) = [0, {phi})")
    return int(fl.return_count(t, [[x, y]], [s])[0])


def flow(t, p: FlowPoint, roof, spec, **kwargs) -> FlowPoint:
    fl = SpecialFlow(roof, spec, **kwargs)
    b, s = fl.flow(t, [[p.x, p.y]], [p.s])
    return FlowPoint(float(b[0, 0]), float(b[0, 1]), float(s[0]))


def time_one_normalized(q, roof, spec, **kwargs):
    """``G_{omega, phi}(q)`` for one point or an ``(n, 3)`` array."""
    arr = np.asarray(q, dtype=np.float64)
    out = SpecialFlow(roof, spec, **kwargs).time_map(arr, 1.0)
    return out[0] if arr.ndim == 1 else out


def invariant_measure(A: Box, roof, spec, samples, rng, **kwargs) -> Estimate:
    """Monte Carlo ``mu_{omega, phi}(A)``: fraction of invariant-measure samples landing in ``A``."""
    samples = check_positive_int(samples, "samples")
    fl = SpecialFlow(roof, spec, **kwargs)
    pts = fl.sample(samples, rng)
    return bernoulli_estimate(int(np.count_nonzero(A.contains(pts))), samples)


def preimage_measure(A: Box, g: TimeOneMap, samples, rng) -> Estimate:
    """Monte Carlo ``mu(G^{-1} A)``: fraction of samples ``p`` with ``G(p)`` in ``A``."""
    samples = check_positive_int(samples, "samples")
    pts = g.sample(samples, rng)
    return bernoulli_estimate(int(np.count_nonzero(A.contains(g.iterate(pts, 1)))), samples)
