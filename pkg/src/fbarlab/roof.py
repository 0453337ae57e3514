"""Roof functions over T^2: the analytic roof ``1 + sum X_n(x) + Y_n(y)`` and
its perturbations by plateau polynomials ``P_{mu,n}``.

A plateau polynomial is the Fourier truncation of a mollified 1/q_n-periodic
trapezoid wave.  It sits at ``+eta`` near ``{q_n x} = 1/4``, at ``-eta`` near
``{q_n x} = 3/4`` and has slope of size ``~ q_n eta`` in between.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import mpmath
import numpy as np

from .errors import InvalidInputError, InvalidRoofError, NoFeasibleEtaError, NumericFailure
from .rotation import RotationSpec
from .trigpoly import TrigPoly, evaluate_grid, norm_bound

BUMP_INTEGRAL = 0.44399381616807943  # int_{-1}^{1} exp(-1/(1-u^2)) du


# -- eta ------------------------------------------------------------------------

@dataclass(frozen=True)
class EtaChoice:
    q: int
    inv_eta: int
    window: tuple  # admissible range of 1/eta

    @property
    def eta(self):
        return 1.0 / self.inv_eta

    @property
    def multiple(self):
        return self.inv_eta // (2 * self.q)


def eta_window(q):
    """Range of ``1/eta`` equivalent to ``q e^{-q}/2 <= eta <= 3 q e^{-q}/4``."""
    with mpmath.workprec(128):
        eq = mpmath.e ** q
        return (4 * eq / (3 * q), 2 * eq / q)


def select_eta(n, spec: RotationSpec, axis="x") -> EtaChoice:
    """Smallest admissible ``1/eta`` that is a multiple of ``2 q_n``."""
    qs = spec.q_x if axis == "x" else spec.q_y
    if not 0 <= n < len(qs):
        raise InvalidInputError(f"index {n} is beyond the supplied quotients")
    q = qs[n]
    lo, hi = eta_window(q)
    j = max(1, int(mpmath.ceil(lo / (2 * q))))
    inv = 2 * q * j
    if inv > hi:
        raise NoFeasibleEtaError(
            f"no multiple of 2 q_n = {2 * q} in [{float(lo):.6g}, {float(hi):.6g}]",
            scanned=(float(lo), float(hi)),
        )
    return EtaChoice(q, inv, (float(lo), float(hi)))


# -- the trapezoid profile ----------------------------------------------------------

@dataclass(frozen=True)
class XiProfile:
    """The odd ``1/q``-periodic trapezoid wave scaled to plateau height ``eta``."""

    q: int
    mu: float
    eta: float

    def __post_init__(self):
        if not 0 < self.mu < 0.25:
            raise InvalidInputError(f"mu must lie in (0, 1/4), got {self.mu}")

    def _shape(self, t):
        # trapezoid on [0, 1/2] in units of t = {q x}, extended oddly
        t = np.mod(t, 1.0)
        s = np.where(t <= 0.5, t, 1.0 - t)
        sign = np.where(t <= 0.5, 1.0, -1.0)
        val = np.minimum(np.minimum(s, 0.5 - s), 0.25 - self.mu)
        return sign * val

    def tilde(self, x):
        """The unscaled wave: ``x`` on the first ramp, plateau ``(1 - 4 mu)/(4 q)``."""
        return self._shape(self.q * np.asarray(x, dtype=np.float64)) / self.q

    def __call__(self, x):
        return self.scale * self.tilde(x)

    @property
    def scale(self):
        return 4 * self.q * self.eta / (1 - 4 * self.mu)

    @property
    def slope(self):
        """``|xi'|`` on the ramps, in x units."""
        return self.scale

    def fourier(self, j):
        """Coefficient of ``exp(2 pi i j t)`` for the wave as a function of ``t = q x``.

        Closed form from the four kinks of the piecewise-linear profile.
        """
        j = np.asarray(j, dtype=np.float64)
        s = self.eta / (0.25 - self.mu)
        kinks = np.array([0.25 - self.mu, 0.25 + self.mu, 0.75 - self.mu, 0.75 + self.mu])
        jumps = np.array([-s, -s, s, s])
        with np.errstate(divide="ignore", invalid="ignore"):
            total = np.exp(-2j * math.pi * np.multiply.outer(j, kinks)) @ jumps
            out = -total / (4 * math.pi**2 * j**2)
        return np.where(j == 0, 0.0, out)


def build_xi(n, mu, eta, spec: RotationSpec, axis="x") -> XiProfile:
    qs = spec.q_x if axis == "x" else spec.q_y
    return XiProfile(qs[n], float(mu), float(eta))


# -- mollifier -------------------------------------------------------------------

def bump(u):
    """Unit-mass bump ``exp(-1/(1-u^2))`` supported on ``(-1, 1)``."""
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2)) / BUMP_INTEGRAL
    return out


def scaled_kernel(n, q, kernel=bump):
    """``K_n(x) = n^2 q K(n^2 q x)``, supported in ``(-1/(n^2 q), 1/(n^2 q))``."""
    a = n * n * q
    return lambda x: a * kernel(a * np.asarray(x, dtype=np.float64))


def kernel_transform(nu, kernel=bump, nodes=1 << 13, tol=1e-13):
    """``int K(u) cos(2 pi nu u) du`` for an even kernel on ``(-1, 1)``.

    Trapezoid rule on a uniform grid (spectrally accurate for a smooth
    compactly supported integrand), checked against a grid twice as fine.
    Returns ``(values, achieved_error)``.
    """
    nu = np.asarray(nu, dtype=np.float64)

    def trap(m):
        u = np.linspace(-1.0, 1.0, m + 1)
        w = kernel(u) * (2.0 / m)
        out = np.empty(nu.shape)
        flat = nu.reshape(-1)
        res = out.reshape(-1)
        step = max(1, (1 << 22) // (m + 1))
        for s in range(0, flat.size, step):
            res[s:s + step] = np.cos(2 * math.pi * np.multiply.outer(flat[s:s + step], u)) @ w
        return out

    coarse = trap(nodes)
    fine = trap(2 * nodes)
    err = float(np.max(np.abs(fine - coarse))) if fine.size else 0.0
    if err > tol:
        raise NumericFailure(f"kernel quadrature did not converge: achieved {err:.3e} > {tol:.1e}")
    return fine, err


# -- plateau polynomials -------------------------------------------------------------

@dataclass(frozen=True)
class PlateauPoly:
    """A truncated mollified trapezoid wave with measured properties.

    ``flags[i]`` says whether property ``i`` (1: ``1/eta in 2 q N``, 2: small
    ``C^r`` norm, 3: plateau accuracy, 4: ramp slope) holds; ``margins[i]`` is
    the signed slack (positive means satisfied).
    """

    poly: TrigPoly
    n: int
    mu: float
    q: int
    q_next: int
    eta_choice: EtaChoice
    r: int
    margins: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def eta(self):
        return self.eta_choice.eta

    @property
    def inv_eta(self):
        return self.eta_choice.inv_eta

    def __call__(self, x):
        return self.poly(x)


def plateau_regions(t, mu):
    """Masks for the plateau neighbourhoods and the ramp region in ``t = {q x}``.

    Returns ``(near_plus, near_minus, ramp_up, ramp_down)``: within ``3 mu`` of
    ``1/4`` and of ``3/4``, and farther than ``4 mu`` from both, split by the
    sign the slope must have.
    """
    t = np.mod(t, 1.0)
    d_plus = np.abs(t - 0.25)
    d_minus = np.abs(t - 0.75)
    near_plus = d_plus < 3 * mu
    near_minus = d_minus < 3 * mu
    ramp = (d_plus > 4 * mu) & (d_minus > 4 * mu)
    descending = (t > 0.25) & (t < 0.75)
    return near_plus, near_minus, ramp & ~descending, ramp & descending


def build_P_mu_n(n, mu, spec: RotationSpec, kernel_choice="bump", *, r=2, axis="x", grid_factor=32, measure=True) -> PlateauPoly:
    """Construct ``P_{mu,n}`` and measure properties 1-4 on a uniform grid.

    The coefficients at frequencies ``k = q_n j`` are ``K^(j / n^2) * xi^(j)``
    (convolution theorem) for ``0 < |k| < q_{n+1}``.
    """
    qs = spec.q_x if axis == "x" else spec.q_y
    if not 1 <= n < len(qs) - 1:
        raise InvalidInputError(f"P_mu_n needs q_n and q_(n+1); index {n} is out of range")
    if not 0 < mu < 0.25:
        raise InvalidInputError(f"mu must lie in (0, 1/4), got {mu}")
    kernel = _resolve_kernel(kernel_choice)
    choice = select_eta(n, spec, axis)
    q, q_next = qs[n], qs[n + 1]
    xi = XiProfile(q, float(mu), choice.eta)
    n_harm = (q_next - 1) // q
    js = np.arange(1, n_harm + 1)
    khat, quad_err = kernel_transform(js / float(n * n), kernel)
    coefs = khat * xi.fourier(js)
    poly = TrigPoly.from_half(1, {int(q * j): c for j, c in zip(js, coefs)})
    details = {"kernel_quadrature_error": quad_err, "harmonics": int(n_harm), "slope_xi": xi.slope}
    pp = PlateauPoly(poly, n, float(mu), q, q_next, choice, r, {}, {}, details)
    if measure:
        _measure(pp, xi, kernel, grid_factor)
    return pp


def _resolve_kernel(kernel_choice):
    if kernel_choice in (None, "bump"):
        return bump
    if callable(kernel_choice):
        mass, _ = kernel_transform(np.array([0.0]), kernel_choice)
        return lambda u: kernel_choice(u) / mass[0]
    raise InvalidInputError(f"unknown kernel {kernel_choice!r}")


def _measure(pp: PlateauPoly, xi: XiProfile, kernel, grid_factor):
    q, q_next, mu, eta = pp.q, pp.q_next, pp.mu, pp.eta
    N = max(grid_factor * q_next, 2 * pp.poly.degree + 1)
    x = np.arange(N) / N
    values = evaluate_grid(pp.poly, N)
    slopes = evaluate_grid(pp.poly.derivative(), N) if len(pp.poly.keys) else np.zeros(N)
    near_plus, near_minus, up, down = plateau_regions(q * x, mu)

    with mpmath.workprec(128):
        norm_cap = float(mpmath.e ** (-3 * mpmath.mpf(q) / 4))
        plateau_cap = float(mpmath.e ** (3 * mpmath.mpf(q) / 4) / q_next)
        slope_floor = float(mpmath.mpf(q) ** 2 / mpmath.e ** q)

    dev = max(
        float(np.max(np.abs(values[near_plus] - eta), initial=0.0)),
        float(np.max(np.abs(values[near_minus] + eta), initial=0.0)),
    )
    signed = np.concatenate([slopes[up], -slopes[down]])
    min_slope = float(np.min(signed)) if signed.size else math.inf
    nb = norm_bound(pp.poly, pp.r)

    # C^r tail of the untruncated series, summed until the terms are negligible
    j0 = (q_next - 1) // q + 1
    js = np.arange(j0, j0 + max(64, 8 * pp.n * pp.n * 40))
    tail_hat, _ = kernel_transform(js / float(pp.n * pp.n), kernel)
    tail = float(np.sum((2 * math.pi * q * js) ** pp.r * np.abs(2 * tail_hat * xi.fourier(js))))

    pp.margins.update({
        1: 0.0 if pp.inv_eta % (2 * q) == 0 else -1.0,
        2: norm_cap - nb,
        3: plateau_cap - dev,
        4: min_slope - slope_floor,
        "tail": plateau_cap - tail,
    })
    pp.flags.update({k: bool(v >= 0) for k, v in pp.margins.items()})
    pp.flags[1] = pp.inv_eta % (2 * q) == 0
    pp.details.update({
        "grid_size": int(N),
        "norm_bound": nb,
        "norm_cap": norm_cap,
        "plateau_deviation": dev,
        "plateau_cap": plateau_cap,
        "min_signed_slope": min_slope,
        "slope_floor": slope_floor,
        "tail_norm_bound": tail,
        "plateau_points": int(near_plus.sum() + near_minus.sum()),
        "ramp_points": int(up.sum() + down.sum()),
    })


# -- assembled roofs ------------------------------------------------------------

class SeparableFunction:
    """``c + B(x, y) + A(x) + C(y)`` with trigonometric ``B``, ``A``, ``C``; vectorised over ``(..., 2)``."""

    dim = 2

    def __init__(self, constant, base, fx, fy):
        self.constant = float(constant)
        self.base = base if base is not None else TrigPoly(2)
        self.fx = fx if fx is not None else TrigPoly(1)
        self.fy = fy if fy is not None else TrigPoly(1)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        out = self.constant + self.fx(theta[..., 0]) + self.fy(theta[..., 1])
        if len(self.base.keys):
            out = out + self.base(theta)
        return out

    @property
    def mean(self):
        return self.constant + self.base.mean + self.fx.mean + self.fy.mean

    def derivative(self, axis):
        fx = self.fx.derivative() if axis == 0 else TrigPoly(1)
        fy = self.fy.derivative() if axis == 1 else TrigPoly(1)
        return SeparableFunction(0.0, self.base.derivative(axis), fx, fy)

    def norm_bound(self, r):
        c = abs(self.constant) if r == 0 else 0.0
        return c + norm_bound(self.base, r) + norm_bound(self.fx, r) + norm_bound(self.fy, r)

    def sup_bound(self):
        return self.norm_bound(0)

    def rectangle_integral(self, x0, x1, y0, y1):
        """Exact integral over ``[x0, x1] x [y0, y1]`` (lengths at most 1, may wrap)."""
        lx, ly = x1 - x0, y1 - y0
        total = self.constant * lx * ly
        total += _integral_1d(self.fx, x0, lx) * ly
        total += _integral_1d(self.fy, y0, ly) * lx
        if len(self.base.keys):
            ix = _exp_integral(self.base.keys[:, 0], x0, lx)
            iy = _exp_integral(self.base.keys[:, 1], y0, ly)
            total += float(np.real(np.sum(self.base.coefs * ix * iy)))
        return total


def _exp_integral(k, a, length):
    k = np.asarray(k, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (np.exp(2j * math.pi * k * (a + length)) - np.exp(2j * math.pi * k * a)) / (2j * math.pi * k)
    return np.where(k == 0, length, val)


def _integral_1d(P, a, length):
    if not len(P.keys):
        return 0.0
    return float(np.real(np.sum(P.coefs * _exp_integral(P.keys[:, 0], a, length))))


@dataclass(frozen=True)
class RoofTerm:
    tag: str  # "X", "Y", "P_mu" or "custom"
    index: int
    axis: str
    poly: TrigPoly
    params: dict = field(default_factory=dict)


class RoofFunction(SeparableFunction):
    """``1 + P(x, y) + sum x-terms(x) + sum y-terms(y)`` with its term list kept for provenance."""

    def __init__(self, base=None, x_terms=(), y_terms=(), depth=0, constant=1.0):
        self.x_terms = tuple(x_terms)
        self.y_terms = tuple(y_terms)
        self.depth = int(depth)
        fx = sum((t.poly for t in self.x_terms), TrigPoly(1))
        fy = sum((t.poly for t in self.y_terms), TrigPoly(1))
        super().__init__(constant, base, fx, fy)

    @classmethod
    def constant_roof(cls, value=1.0):
        return cls(constant=value)

    def __repr__(self):
        tags = [f"{t.tag}{t.index}" for t in self.x_terms + self.y_terms]
        return f"RoofFunction(depth={self.depth}, base_degree={self.base.degree}, terms={tags})"

    def grid_minimum(self, n_points=10**4):
        """Minimum over a ``sqrt(n) x sqrt(n)`` grid; returns ``(value, (x, y))``."""
        side = max(2, int(round(math.sqrt(n_points))))
        g = np.arange(side) / side
        if len(self.base.keys):
            X, Y = np.meshgrid(g, g, indexing="ij")
            vals = self(np.stack([X, Y], axis=-1))
        else:
            vals = self.constant + self.fx(g)[:, None] + self.fy(g)[None, :]
        i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        return float(vals[i, j]), (float(g[i]), float(g[j]))

    def check_positive(self, n_points=10**4):
        value, point = self.grid_minimum(n_points)
        if not value > 0:
            raise InvalidRoofError(f"roof is not positive: value {value:.6g} at {point}", point=point, value=value)
        return value

    def to_json(self):
        return {
            "constant": self.constant,
            "depth": self.depth,
            "base": self.base.to_json(),
            "x_terms": [_term_json(t) for t in self.x_terms],
            "y_terms": [_term_json(t) for t in self.y_terms],
        }

    @classmethod
    def from_json(cls, data):
        try:
            base = TrigPoly.from_json(data.get("base", []), dim=2)
            xs = [_term_from_json(t) for t in data.get("x_terms", [])]
            ys = [_term_from_json(t) for t in data.get("y_terms", [])]
            return cls(base, xs, ys, data.get("depth", 0), data.get("constant", 1.0))
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidInputError(f"malformed roof description: {exc}") from None


def _term_json(t):
    return {"tag": t.tag, "index": t.index, "axis": t.axis, "params": dict(t.params), "poly": t.poly.to_json()}


def _term_from_json(d):
    return RoofTerm(d["tag"], int(d["index"]), d.get("axis", "x"), TrigPoly.from_json(d["poly"], dim=1), dict(d.get("params", {})))


def x_term(spec: RotationSpec, k):
    """``X_k(x) = e^{-q_k} cos(2 pi q_k x)``."""
    q = spec.q_x[k]
    return RoofTerm("X", k, "x", TrigPoly.cosine(q, math.exp(-q)), {"q": q})


def y_term(spec: RotationSpec, k):
    """``Y_k(y) = e^{-q'_k} cos(2 pi q'_k y)``."""
    q = spec.q_y[k]
    return RoofTerm("Y", k, "y", TrigPoly.cosine(q, math.exp(-q)), {"q": q})


def assemble_roof(spec: RotationSpec, base_P=None, substitutions: Mapping[int, PlateauPoly] | None = None, depth=0, *, check=True, grid=10**4) -> RoofFunction:
    """``1 + P + sum_{k <= depth} (X_k or substitute)(x) + Y_k(y)``.

    Raises :class:`InvalidRoofError` if the result is not positive on the grid.
    """
    substitutions = dict(substitutions or {})
    available = min(len(spec.q_x), len(spec.q_y)) - 1
    if depth < 0 or depth > available:
        raise InvalidInputError(f"depth must lie in [0, {available}]")
    for k in substitutions:
        if not 1 <= k <= depth:
            raise InvalidInputError(f"substitution index {k} is outside 1..{depth}")
    if base_P is not None and base_P.dim != 2:
        raise InvalidInputError("base polynomial must be two-dimensional")
    xs, ys = [], []
    for k in range(1, depth + 1):
        if k in substitutions:
            pp = substitutions[k]
            xs.append(RoofTerm("P_mu", k, "x", pp.poly, {"mu": pp.mu, "inv_eta": pp.inv_eta, "q": pp.q}))
        else:
            xs.append(x_term(spec, k))
        ys.append(y_term(spec, k))
    roof = RoofFunction(base_P, xs, ys, depth)
    if check:
        roof.check_positive(grid)
    return roof


def phi0(spec: RotationSpec, depth, **kwargs) -> RoofFunction:
    """Truncation of the analytic roof ``1 + sum X_n + Y_n`` at ``depth``."""
    return assemble_roof(spec, None, None, depth, **kwargs)


def mollified_profile(pp: PlateauPoly, x, kernel=bump, nodes=4001):
    """Direct quadrature of ``(K_n * xi_n)(x)``, independent of the Fourier route."""
    xi = XiProfile(pp.q, pp.mu, pp.eta)
    a = pp.n * pp.n * pp.q
    u = np.linspace(-1.0, 1.0, nodes)
    w = kernel(u) * (u[1] - u[0])
    x = np.asarray(x, dtype=np.float64)
    return np.array([np.sum(w * xi(xx - u / a)) for xx in x.reshape(-1)]).reshape(x.shape)
