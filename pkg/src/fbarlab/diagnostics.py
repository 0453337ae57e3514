"""Mixing diagnostics: Monte Carlo correlation decay and the derivative checks of the mixing criterion.

The criterion asks, for ``x`` with ``{q_n x}`` away from ``1/4`` and ``3/4``,

    |d/dx S_m phi(x, y)| >= (m / e^{q_n}) (q_n / n)

for ``m`` in ``[e^{2 q_n} / 2, 2 e^{2 q'_n}]``, and the analogous bound in
``y``.  Those ranges are astronomically large beyond toy scale, so the check
runs on an explicit list of ``m`` and labels each one as inside or outside
the range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._stats import stream
from ._validation import check_positive_int
from .boxes import Box
from .errors import CapExceededError, InvalidInputError
from .maps import TorusMap, Translation
from .roof import RoofFunction, SeparableFunction
from .rotation import RotationSpec
from .trigpoly import birkhoff_sum

DEFAULT_M_CAP = 10**6


# -- correlations ----------------------------------------------------------------

@dataclass
class CorrelationSeries:
    A: Box
    B: Box
    lags: list
    values: list       # |mu(A cap T^-n B) - mu(A) mu(B)|
    signed: list
    se: list
    mu_A: float
    mu_B: float
    samples: int
    seed: object = None

    def rows(self):
        for lag, v, s, e in zip(self.lags, self.values, self.signed, self.se):
            yield {"lag": lag, "estimate": v, "signed": s, "se": e}

    def to_dict(self):
        return {
            "A": self.A.to_dict(), "B": self.B.to_dict(), "mu_A": self.mu_A, "mu_B": self.mu_B,
            "samples": self.samples, "seed": self.seed, "rows": list(self.rows()),
        }


def _check_lags(lags):
    lags = [int(v) for v in lags]
    if not lags:
        raise InvalidInputError("lags must be non-empty")
    if any(v < 0 for v in lags) or lags != sorted(lags):
        raise InvalidInputError("lags must be non-negative and sorted")
    return lags


def correlation(T: TorusMap, A: Box, B: Box, lags, samples=10**5, seed=None) -> CorrelationSeries:
    """Estimate ``|mu(A cap T^{-n} B) - mu(A) mu(B)|`` at each lag.

    Points are drawn from the invariant measure of ``T`` and pushed forward,
    so ``T^{-n} B`` never has to be represented.  ``mu(A)`` and ``mu(B)``
    come from ``T.measure_box``.
    """
    lags = _check_lags(lags)
    samples = check_positive_int(samples, "samples")
    rng = stream(seed, "diagnostics/correlation")
    pts = T.sample(samples, rng)
    inA = A.contains(pts)
    mu_A, mu_B = float(T.measure_box(A)), float(T.measure_box(B))
    product = mu_A * mu_B
    values, signed, ses = [], [], []
    current = 0
    for lag in lags:
        if lag > current:
            pts = T.iterate(pts, lag - current)
            current = lag
        joint = inA & B.contains(pts)
        p = float(np.count_nonzero(joint)) / samples
        c = p - product
        signed.append(c)
        values.append(abs(c))
        ses.append(math.sqrt(max(p * (1 - p), 0.0) / samples))
    return CorrelationSeries(A, B, lags, values, signed, ses, mu_A, mu_B, samples, seed)


def _arc_overlap(pieces_a, pieces_b):
    total = 0
    for a, b in pieces_a:
        for c, d in pieces_b:
            lo, hi = max(a, c), min(b, d)
            if hi > lo:
                total += hi - lo
    return total


def box_overlap(A: Box, B: Box):
    """Lebesgue measure of ``A cap B``; exact for fractional endpoints."""
    if A.dim != B.dim:
        raise InvalidInputError("boxes must have the same dimension")
    vol = 1
    for axis in range(A.dim):
        vol *= _arc_overlap(A.pieces(axis), B.pieces(axis))
    return vol


def translation_correlation(T: Translation, A: Box, B: Box, lags):
    """Closed-form signed correlations ``vol(A cap (B - n v)) - vol(A) vol(B)``."""
    lags = _check_lags(lags)
    out = []
    for lag in lags:
        shift = tuple(-c for c in T.exact_offset(lag)) if _is_exact(T) else tuple(-c for c in T.offset(lag))
        out.append(float(box_overlap(A, B.translate(shift))) - float(A.volume) * float(B.volume))
    return out


def _is_exact(T):
    return all(isinstance(v, (int, Fraction)) for v in T.vector)


# -- mixing criterion ---------------------------------------------------------------

@dataclass
class CriterionReport:
    n: int
    q: int
    q_prime: int
    r: float
    r_prime: float
    excluded: list         # intervals of {q_n x} removed from the circle
    excluded_prime: list
    m_range: tuple         # (e^{2q_n}/2, 2 e^{2q'_n})
    m_range_prime: tuple   # (e^{2q_n}/2, 2 e^{2q_{n+1}})
    rows: list = field(default_factory=list)
    rows_prime: list = field(default_factory=list)
    grid: int = 0
    points_used: int = 0
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        if not self.rows:
            return False
        return all(r["passed"] for r in self.rows + self.rows_prime)

    @property
    def excluded_lengths(self):
        return [b - a for a, b in self.excluded]

    def to_dict(self):
        return {
            "n": self.n, "q_n": self.q, "q_prime_n": self.q_prime, "r_n": self.r, "r_prime_n": self.r_prime,
            "excluded": self.excluded, "excluded_lengths": self.excluded_lengths, "excluded_prime": self.excluded_prime,
            "m_range": list(self.m_range), "m_range_prime": list(self.m_range_prime),
            "grid": self.grid, "points_used": self.points_used,
            "x_check": self.rows, "y_check": self.rows_prime, "passed": self.passed, "notes": self.notes,
        }


def excluded_intervals(r):
    """``{q x}`` values removed to form ``I_n``: within ``r`` of ``1/4`` or ``3/4``."""
    return [[0.25 - r, 0.25 + r], [0.75 - r, 0.75 + r]]


def in_criterion_set(t, r):
    """``True`` where ``| {t} - 1/2 pm 1/4 | > r`` for both signs (circular distance)."""
    t = np.mod(np.asarray(t, dtype=np.float64), 1.0)
    keep = np.ones(t.shape, dtype=bool)
    for centre in (0.25, 0.75):
        d = np.abs(t - centre)
        keep &= np.minimum(d, 1.0 - d) > r
    return keep


def default_radius(roof: RoofFunction, n, axis="x"):
    """``5 mu`` when the index-``n`` term is a plateau polynomial, ``1/n`` otherwise."""
    terms = roof.x_terms if axis == "x" else roof.y_terms
    for t in terms:
        if t.index == n and t.tag == "P_mu":
            return 5.0 * float(t.params["mu"])
    return 1.0 / n


def _safe_exp(v):
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def check_mixing_criterion(roof: SeparableFunction, spec: RotationSpec, n, m_list, grid=512, *, y_grid=16, r=None, r_prime=None, check_y=True, cap=DEFAULT_M_CAP) -> CriterionReport:
    """Margins ``min |d S_m phi| - bound`` over grid points of ``I_n`` (and ``I'_n``) for each ``m``."""
    n = check_positive_int(n, "n")
    grid = check_positive_int(grid, "grid")
    y_grid = check_positive_int(y_grid, "y_grid")
    if n >= len(spec.q_x) or n >= len(spec.q_y):
        raise InvalidInputError(f"index {n} is beyond the rotation depth")
    ms = sorted({int(m) for m in m_list})
    if not ms or ms[0] < 1:
        raise InvalidInputError("m_list must contain positive integers")
    if ms[-1] > cap:
        raise CapExceededError(f"m = {ms[-1]} exceeds the Birkhoff sum cap {cap}")
    q, qp = spec.q_x[n], spec.q_y[n]
    q_next = spec.q_x[n + 1] if n + 1 < len(spec.q_x) else None
    is_roof = isinstance(roof, RoofFunction)
    if r is None:
        r = default_radius(roof, n, "x") if is_roof else 1.0 / n
    if r_prime is None:
        r_prime = default_radius(roof, n, "y") if is_roof else 1.0 / n
    report = CriterionReport(
        n, q, qp, float(r), float(r_prime), excluded_intervals(r), excluded_intervals(r_prime),
        (_safe_exp(2 * q) / 2, 2 * _safe_exp(2 * qp)),
        (_safe_exp(2 * q) / 2, 2 * _safe_exp(2 * q_next) if q_next is not None else math.inf),
        grid=grid,
    )

    # x-check: x on a uniform grid restricted to I_n, y on a coarse grid
    xs = np.arange(grid) / grid
    xs = xs[in_criterion_set(q * xs, r)]
    ys = (np.arange(y_grid) + 0.5) / y_grid
    report.points_used = int(xs.size * ys.size)
    if xs.size:
        theta = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        sums = birkhoff_sum(roof.derivative(0), spec, ms, theta, dim=2)
        for m, row in zip(ms, sums):
            bound = m / _safe_exp(q) * q / n
            report.rows.append(_row(m, row, bound, report.m_range))
    else:
        report.notes.append(f"I_n is empty on the grid (r_n = {r:.4g} >= 1/4 removes the whole circle)")
    if check_y:
        ys2 = np.arange(grid) / grid
        ys2 = ys2[in_criterion_set(qp * ys2, r_prime)]
        xs2 = (np.arange(y_grid) + 0.5) / y_grid
        if ys2.size:
            theta = np.stack(np.meshgrid(xs2, ys2, indexing="ij"), axis=-1).reshape(-1, 2)
            sums = birkhoff_sum(roof.derivative(1), spec, ms, theta, dim=2)
            for m, row in zip(ms, sums):
                bound = m / _safe_exp(qp) * qp / n
                report.rows_prime.append(_row(m, row, bound, report.m_range_prime))
        else:
            report.notes.append(f"I'_n is empty on the grid (r'_n = {r_prime:.4g})")
    return report


def _row(m, values, bound, m_range):
    low = float(np.min(np.abs(values)))
    return {
        "m": m,
        "bound": bound,
        "min_abs_derivative": low,
        "margin": low - bound,
        "ratio": low / bound if bound > 0 else math.inf,
        "in_paper_range": bool(m_range[0] <= m <= m_range[1]),
        "passed": bool(low >= bound),
    }


def derivative_birkhoff(roof: SeparableFunction, spec: RotationSpec, m, theta, axis=0):
    """``d/d(axis) S_m phi`` at ``theta`` (shape ``(..., 2)``)."""
    return birkhoff_sum(roof.derivative(axis), spec, m, theta, dim=2)
