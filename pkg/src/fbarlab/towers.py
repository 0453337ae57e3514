"""Rokhlin towers with box bases: statistical certificates, product towers,
the explicit towers over special flows, LB schedules and tower-assisted matching.

Disjointness, precision and monochromaticity are Monte Carlo certificates:
they carry sample counts and seeds, and the absence of a refutation is never
reported as a proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from ._stats import Estimate, bernoulli_estimate, mean_estimate, stream
from ._validation import check_positive_int, check_word
from .boxes import Box
from .errors import InvalidInputError, PreconditionFailed
from .flow import SpecialFlow, TimeOneMap
from .maps import ProductMap, TorusMap, Translation
from .roof import RoofFunction
from .rotation import RotationSpec
from .symbolic import CubePartition, lcs_bitparallel
from .trigpoly import birkhoff_sum


@dataclass(frozen=True)
class RokhlinTower:
    base: Box
    height: int
    map: TorusMap

    def __post_init__(self):
        check_positive_int(self.height, "height")
        if self.base.dim != self.map.dim:
            raise InvalidInputError("base dimension does not match the map")

    @property
    def base_measure(self):
        return float(self.map.measure_box(self.base))

    @property
    def size(self):
        """``h mu(F)``, the measure of the support when the levels are disjoint."""
        return self.height * self.base_measure

    def in_base(self, points):
        return self.base.contains(points)

    def level_flags(self, points, n=1):
        """Level index of ``T^i p`` for ``0 <= i < n`` (``-1`` off the tower), shape ``(len, n)``.

        Iterates back ``h - 1`` steps and then forward, so that level ``k``
        at time ``i`` means ``T^{i - k} p`` is in the base.
        """
        h = self.height
        pts = self.map.iterate(points, -(h - 1)) if h > 1 else np.array(points, dtype=np.float64)
        flags = np.empty((len(pts), h - 1 + n), dtype=bool)
        for j in range(h - 1 + n):
            flags[:, j] = self.in_base(pts)
            if j + 1 < h - 1 + n:
                pts = self.map.step(pts)
        out = np.full((len(pts), n), -1, dtype=np.int64)
        for i in range(n):
            # time i corresponds to column i + h - 1; level k looks back k columns
            for k in range(h):
                hit = (out[:, i] < 0) & flags[:, i + h - 1 - k]
                out[hit, i] = k
        return out

    def to_dict(self):
        return {"base": self.base.to_dict(), "height": self.height}


# -- certificates ----------------------------------------------------------------

@dataclass
class DisjointnessCertificate:
    passed: bool
    samples: int
    seed: object
    height: int
    witness: list | None = None
    step: int | None = None
    refuting_fraction: float = 0.0
    note: str = "no refutation found; sampling cannot prove disjointness"

    def to_dict(self):
        return dict(self.__dict__)


def verify_disjointness(tower: RokhlinTower, samples=10**4, seed=None) -> DisjointnessCertificate:
    """Look for ``p`` in ``F`` with ``T^k p`` in ``F`` for some ``0 < k < h``."""
    samples = check_positive_int(samples, "samples")
    cert = DisjointnessCertificate(True, samples, seed, tower.height)
    if tower.height == 1:
        cert.note = "height 1: levels are trivially disjoint"
        return cert
    rng = stream(seed, "towers/disjointness")
    pts = tower.map.sample_box(tower.base, samples, rng)
    start = pts.copy()
    bad = np.zeros(samples, dtype=bool)
    for k in range(1, tower.height):
        pts = tower.map.step(pts)
        hit = tower.in_base(pts) & ~bad
        if np.any(hit) and cert.passed:
            i = int(np.flatnonzero(hit)[0])
            cert.passed = False
            cert.witness = [float(c) for c in start[i]]
            cert.step = k
            cert.note = f"refuted: T^{k} of the witness lies in the base"
        bad |= hit
    cert.refuting_fraction = float(bad.mean())
    return cert


def precision(tower: RokhlinTower, samples=10**4, seed=None) -> Estimate:
    """``rho = mu(F symmetric-difference T^h F) = 2 (mu(F) - mu(F cap T^{-h} F))``."""
    samples = check_positive_int(samples, "samples")
    rng = stream(seed, "towers/precision")
    pts = tower.map.sample_box(tower.base, samples, rng)
    back = tower.in_base(tower.map.iterate(pts, tower.height))
    est = bernoulli_estimate(int(np.count_nonzero(~back)), samples, 2 * tower.base_measure)
    return est


@dataclass
class MonochromReport:
    labels: list          # I(k) for k = 0..h-1, 1-based cell indices
    delta: Estimate       # Delta from the level assignment
    level_escape: list    # mu(T^k F minus P_{I(k)}) per level
    difference_set: Estimate | None = None
    samples: int = 0

    @property
    def consistent(self):
        return self.difference_set is None or self.delta.within(self.difference_set)

    def to_dict(self):
        out = {"labels": self.labels, "delta": self.delta.to_dict(), "level_escape": self.level_escape, "samples": self.samples}
        if self.difference_set is not None:
            out["difference_set"] = self.difference_set.to_dict()
        return out


def monochromaticity(tower: RokhlinTower, part: CubePartition, samples=10**4, seed=None, *, difference_samples=0) -> MonochromReport:
    """Level labels ``I(k)`` (smallest index among the least escaping cells) and ``Delta``.

    With ``difference_samples > 0`` the difference set ``D`` is also measured
    directly, from independent samples of the whole space.
    """
    samples = check_positive_int(samples, "samples")
    rng = stream(seed, "towers/monochromaticity")
    pts = tower.map.sample_box(tower.base, samples, rng)
    muF = tower.base_measure
    labels, escape = [], []
    escapes_per_point = np.zeros(samples)
    for k in range(tower.height):
        cells = part.classify(pts)
        counts = np.bincount(cells, minlength=part.n_cells + 1)[1:]
        j = int(np.argmax(counts)) + 1  # ties go to the smallest symbol
        labels.append(j)
        miss = cells != j
        escape.append(muF * float(miss.mean()))
        escapes_per_point += miss
        if k + 1 < tower.height:
            pts = tower.map.step(pts)
    report = MonochromReport(labels, mean_estimate(escapes_per_point, muF), escape, None, samples)
    if difference_samples:
        report.difference_set = difference_set_measure(tower, part, labels, difference_samples, seed)
    return report


def difference_set_measure(tower: RokhlinTower, part: CubePartition, labels, samples, seed=None) -> Estimate:
    """Fraction of invariant-measure samples in ``D = union_k T^k F minus P_{I(k)}``."""
    samples = check_positive_int(samples, "samples")
    rng = stream(seed, "towers/difference-set")
    pts = tower.map.sample(samples, rng)
    level = tower.level_flags(pts, 1)[:, 0]
    cells = part.classify(pts)
    lab = np.asarray(labels, dtype=np.int64)
    inD = (level >= 0) & (cells != lab[np.maximum(level, 0)])
    return bernoulli_estimate(int(np.count_nonzero(inD)), samples)


# -- product towers ----------------------------------------------------------------

@dataclass
class ProductTower:
    plus: RokhlinTower
    minus: RokhlinTower
    c: float
    height: int
    e_plus: Estimate
    e_minus: Estimate
    size: Estimate
    size_floor: float
    certified: bool
    rho: tuple
    delta_bound: float | None = None

    @property
    def map(self):
        return ProductMap(self.plus.map, self.minus.map)

    def in_base(self, points):
        """Membership in ``E^+ x E^-``, deciding ``E^pm`` by iterating ``T^{k h^pm}``."""
        pts = np.asarray(points, dtype=np.float64)
        d = self.plus.map.dim
        return _in_E(self.plus, self.minus.height, pts[:, :d]) & _in_E(self.minus, self.plus.height, pts[:, d:])

    def to_dict(self):
        return {
            "heights": [self.plus.height, self.minus.height],
            "height": self.height,
            "c": self.c,
            "mu_E_plus": self.e_plus.to_dict(),
            "mu_E_minus": self.e_minus.to_dict(),
            "size": self.size.to_dict(),
            "size_floor": self.size_floor,
            "certified": self.certified,
            "rho": list(self.rho),
            "delta_bound": self.delta_bound,
        }


def _in_E(tower, other_height, pts):
    """``p in E = intersection over 0 <= k < h' of T^{-k h} F``."""
    ok = tower.in_base(pts)
    cur = pts
    for _ in range(1, other_height):
        cur = tower.map.iterate(cur, tower.height)
        ok &= tower.in_base(cur)
    return ok


def precision_condition(h_other, rho, c, mu, h):
    """``(h^mp - 1) rho_pm < (1 - c) mu_pm / h^pm`` as ``(lhs, rhs)``."""
    return (h_other - 1) * rho, (1 - c) * mu / h


def product_tower(tp: RokhlinTower, tm: RokhlinTower, c=0.9, *, samples=10**4, seed=None, rho=None, deltas=None) -> ProductTower:
    """Tower of height ``h^+ h^-`` over ``E^+ x E^-`` for the product system."""
    if not 0 < c < 1:
        raise InvalidInputError("c must lie in (0, 1)")
    hp, hm = tp.height, tm.height
    if math.gcd(hp, hm) != 1:
        raise PreconditionFailed(f"heights {hp} and {hm} are not relatively prime")
    if rho is None:
        rho = (precision(tp, samples, seed).value, precision(tm, samples, seed).value)
    mu_p, mu_m = tp.size, tm.size
    for name, h_other, r, mu, h in (("+", hm, rho[0], mu_p, hp), ("-", hp, rho[1], mu_m, hm)):
        lhs, rhs = precision_condition(h_other, r, c, mu, h)
        if not lhs < rhs:
            raise PreconditionFailed(
                f"precision condition (h^{'-' if name == '+' else '+'} - 1) rho_{name} < (1 - c) mu_{name} / h^{name} fails: {lhs:.6g} >= {rhs:.6g}"
            )
    rng_p = stream(seed, "towers/product/plus")
    rng_m = stream(seed, "towers/product/minus")
    fp = float(_in_E(tp, hm, tp.map.sample_box(tp.base, samples, rng_p)).mean())
    fm = float(_in_E(tm, hp, tm.map.sample_box(tm.base, samples, rng_m)).mean())
    ep = Estimate(tp.base_measure * fp, tp.base_measure * math.sqrt(fp * (1 - fp) / samples), samples)
    em = Estimate(tm.base_measure * fm, tm.base_measure * math.sqrt(fm * (1 - fm) / samples), samples)
    size = hp * hm * ep.value * em.value
    rel = math.hypot(ep.se / ep.value if ep.value else math.inf, em.se / em.value if em.value else math.inf)
    size_est = Estimate(size, size * rel if size else 0.0, samples)
    floor = c * c * mu_p * mu_m
    bound = None if deltas is None else deltas[0] * mu_m + deltas[1] * mu_p
    return ProductTower(tp, tm, c, hp * hm, ep, em, size_est, floor, bool(size >= floor - 3 * size_est.se), tuple(float(r) for r in rho), bound)


def exact_product_levels(tp: RokhlinTower, tm: RokhlinTower):
    """Levels ``T^k F^+ x T^k F^-`` of a periodic product tower with exact translations.

    Requires :class:`Translation` maps with rational vectors and
    ``T^h F = F`` exactly for both towers (so ``E^pm = F^pm``).
    """
    for t in (tp, tm):
        if not isinstance(t.map, Translation):
            raise InvalidInputError("exact levels need translation maps")
        if t.base.translate(t.map.exact_offset(t.height)) != t.base:
            raise PreconditionFailed("tower is not periodic: T^h F differs from F")
    levels = []
    for k in range(tp.height * tm.height):
        levels.append((tp.base.translate(tp.map.exact_offset(k)), tm.base.translate(tm.map.exact_offset(k))))
    return levels


def overlapping_levels(levels):
    """Pairs ``(i, j)`` of product levels that intersect (exact box arithmetic)."""
    bad = []
    for i in range(len(levels)):
        for j in range(i + 1, len(levels)):
            if levels[i][0].intersects(levels[j][0]) and levels[i][1].intersects(levels[j][1]):
                bad.append((i, j))
    return bad


# -- the explicit towers over the special flow -------------------------------------

@dataclass
class Check:
    name: str
    value: float
    bound: float
    passed: bool
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "value": float(self.value), "bound": float(self.bound), "passed": bool(self.passed), "detail": self.detail}


@dataclass
class PaperTowers:
    plus: RokhlinTower
    minus: RokhlinTower
    m: int
    mu: float
    eta: float
    q: int
    checks: list = field(default_factory=list)
    certificates: dict = field(default_factory=dict)
    birkhoff_margins: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def diagnostics(self):
        return [f"{c.name}: {c.detail or 'fails'} (value {c.value:.6g}, bound {c.bound:.6g})" for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "m": self.m, "mu": self.mu, "eta": self.eta, "q_m": self.q,
            "heights": [self.plus.height, self.minus.height],
            "bases": [self.plus.base.to_dict(), self.minus.base.to_dict()],
            "checks": [c.to_dict() for c in self.checks],
            "certificates": {k: v.to_dict() for k, v in self.certificates.items()},
            "birkhoff_margins": self.birkhoff_margins,
            "passed": self.passed,
            "diagnostics": self.diagnostics,
        }


def paper_bases(q, eta, mu):
    """``F^pm = I^pm x T x [q eta / 4, 3 q eta / 4]`` with ``I^pm`` centred at ``1/(4q)`` and ``3/(4q)``."""
    out = []
    for centre in (1 / (4 * q), 3 / (4 * q)):
        out.append(Box((centre - 2 * mu / q, 0.0, q * eta / 4), (4 * mu / q, 1.0, q * eta / 2)))
    return tuple(out)


def build_paper_towers(roof: RoofFunction, spec: RotationSpec, m, mu=None, *, samples=10**5, seed=None, l_cap=64, birkhoff_points=256, max_height=10**4, flow_kwargs=None) -> PaperTowers:
    """Towers ``T(F^pm, 1/eta_m pm 1)`` for the time-one map of the roof, with every check reported.

    Heights above ``max_height`` are not iterated: the sampled checks are
    replaced by a failed "height within simulation cap" check.
    """
    term = next((t for t in roof.x_terms if t.tag == "P_mu" and t.index == m), None)
    if term is None:
        raise PreconditionFailed(f"roof has no plateau polynomial at index {m}")
    inv_eta = int(term.params["inv_eta"])
    mu = float(term.params["mu"] if mu is None else mu)
    q = spec.q_x[m]
    eta = 1.0 / inv_eta
    G = TimeOneMap(SpecialFlow(roof, spec, **(flow_kwargs or {})))
    fp, fm = paper_bases(q, eta, mu)
    tp, tm = RokhlinTower(fp, inv_eta + 1, G), RokhlinTower(fm, inv_eta - 1, G)
    out = PaperTowers(tp, tm, m, mu, eta, q)

    out.checks.append(Check("h+ = h- + 2", tp.height - tm.height, 2, tp.height - tm.height == 2))
    feasible = tp.height <= max_height
    if not feasible:
        out.checks.append(Check("height within simulation cap", tp.height, max_height, False,
                                "1/eta_m grows like e^(q_m)/q_m; sampled checks skipped"))
    for name, t in (("+", tp), ("-", tm)) if feasible else ():
        cert = verify_disjointness(t, samples, seed)
        out.certificates[name] = cert
        out.checks.append(Check(f"disjointness {name}", cert.refuting_fraction, 0.0, cert.passed,
                                "" if cert.passed else f"level {cert.step} returns to the base; the return-time argument needs q_(m+1) >> h"))
        out.checks.append(Check(f"size {name} > mu", t.size, mu, t.size > mu,
                                "" if t.size > mu else "measured size does not exceed mu at this m"))
        rho = precision(t, min(samples, 10**5), seed)
        cap = mu / (2 * tp.height**2)
        out.checks.append(Check(f"precision {name} < mu/(2 h+^2)", rho.value, cap, rho.value < cap,
                                "" if rho.value < cap else "Birkhoff sums of the roof are not yet within e^(-2q_m) of l q_m (1 - eta_m)"))
    printed = (1 - eta) / eta * (3 * eta * mu / 2)
    out.checks.append(Check("printed size formula > mu", printed, mu, printed > mu))

    # |S_{l q} psi - l q + l q eta| < e^{-2q} on I^- x T
    rng = stream(seed, "towers/paper/birkhoff")
    ls = list(range(1, int(min(l_cap, max(1, math.floor(math.exp(q)) - 1))) + 1))
    theta = fm.sample_uniform(birkhoff_points, rng)[:, :2]
    sums = birkhoff_sum(roof, spec, [l * q for l in ls], theta, dim=2)
    bound = math.exp(-2 * q)
    worst = 0.0
    for l, row in zip(ls, sums):
        dev = float(np.max(np.abs(row - l * q + l * q * eta)))
        worst = max(worst, dev)
        out.birkhoff_margins.append({"l": l, "deviation": dev, "bound": bound, "margin": bound - dev})
    out.checks.append(Check("Birkhoff approximation", worst, bound, worst < bound,
                            "" if worst < bound else "needs e^(3q_m/4)/q_(m+1) and q_m/e^(q'_m) far below e^(-2q_m)"))
    return out


# -- LB schedules ------------------------------------------------------------------

_N = sympy.Symbol("n", integer=True, nonnegative=True)


def parse_law(text):
    """Size law ``mu_n`` from an expression in ``n`` such as ``"(n+1)^-0.25"`` or ``"2^-n"``."""
    try:
        expr = sympy.sympify(text.replace("^", "**"), locals={"n": _N})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise InvalidInputError(f"cannot parse size law {text!r}: {exc}") from None
    if expr.free_symbols - {_N}:
        raise InvalidInputError(f"size law may only depend on n, got {expr.free_symbols}")
    return expr


@dataclass
class LBSchedule:
    mode: str
    sizes: list
    alpha: list
    delta: list
    diverges: bool | None
    first_crossing: int | None
    plateau_at: int | None
    law: str | None = None

    @property
    def limit(self):
        return self.alpha[-1]

    def to_dict(self):
        return dict(self.__dict__)

    def rows(self):
        for n, a in enumerate(self.alpha):
            yield n, a, (self.delta[n] if n < len(self.delta) else None)


def lb_schedule(sizes, mode="single", steps=1000, *, threshold=0.5) -> LBSchedule:
    """Run ``alpha_0 = 0``, ``alpha_{n+1} = alpha_n + delta_n``.

    ``delta_n = mu_{n+1}^2 ((1 - alpha_n)/10)^2`` in single mode and
    ``(mu^+_{n+1} mu^-_{n+1} / 2)^2 ((1 - alpha_n)/10)^2`` in product mode.
    ``sizes`` is a law string, a sympy expression, a callable of ``n`` or a
    sequence; in product mode a value may be a pair ``(mu^+, mu^-)``.
    Divergence of ``sum mu_n^2`` (resp. ``sum (mu^+ mu^-)^2``) is decided
    symbolically for laws and left as ``None`` otherwise.
    """
    if mode not in ("single", "product"):
        raise InvalidInputError(f"mode must be 'single' or 'product', got {mode!r}")
    steps = check_positive_int(steps, "steps", minimum=0)
    law_text, diverges = None, None
    if isinstance(sizes, str):
        law_text = sizes
        sizes = parse_law(sizes)
    if isinstance(sizes, sympy.Basic):
        expr = sizes
        f = sympy.lambdify(_N, expr, "mpmath")
        size_fn = lambda n: float(f(n))  # noqa: E731
        term = expr**2 if mode == "single" else expr**4
        try:
            conv = sympy.Sum(term, (_N, 0, sympy.oo)).is_convergent()
            diverges = None if conv is None else not bool(conv)
        except (NotImplementedError, TypeError, ValueError):
            diverges = None
    elif callable(sizes):
        size_fn = sizes
    else:
        seq = list(sizes)
        if len(seq) < steps + 1:
            raise InvalidInputError(f"need {steps + 1} sizes, got {len(seq)}")
        size_fn = seq.__getitem__

    def pair(n):
        v = size_fn(n)
        if mode == "product":
            a, b = (v, v) if np.ndim(v) == 0 else v
            a, b = float(a), float(b)
            for x in (a, b):
                if not 0 < x <= 1:
                    raise InvalidInputError(f"sizes must lie in (0, 1], got {x} at n = {n}")
            return (a, b)
        v = float(v)
        if not 0 < v <= 1:
            raise InvalidInputError(f"sizes must lie in (0, 1], got {v} at n = {n}")
        return v

    alpha, delta, used = [0.0], [], []
    crossing = plateau = None
    for n in range(steps):
        s = pair(n + 1)
        used.append(s)
        factor = s * s if mode == "single" else (s[0] * s[1] / 2) ** 2
        d = factor * ((1 - alpha[-1]) / 10) ** 2
        nxt = alpha[-1] + d
        delta.append(d)
        if plateau is None and nxt == alpha[-1]:
            plateau = n
        alpha.append(nxt)
        if crossing is None and nxt >= threshold:
            crossing = n + 1
    return LBSchedule(mode, used, alpha, delta, diverges, crossing, plateau, law_text)


# -- tower-assisted matching ---------------------------------------------------------

@dataclass(frozen=True)
class MatchingBound:
    value: int
    blocks: int
    tower_matches: int
    odd_matches: int
    c: float


def default_c(alpha):
    """``c = min{9/10, (1 - alpha)/alpha}``."""
    if alpha <= 0:
        return 0.9
    return min(0.9, (1 - alpha) / alpha)


def _check_hits(hits, h, n, name):
    hits = [int(i) for i in hits]
    for a, b in zip(hits, hits[1:]):
        if b - a < h:
            raise InvalidInputError(f"{name} must be increasing with gaps >= h = {h}")
    if hits and (hits[0] < 0 or hits[-1] >= n):
        raise InvalidInputError(f"{name} must lie in [0, {n})")
    return [i for i in hits if i + h <= n]


def tower_matching_bound(vname, wname, base_hits_v, base_hits_w, h, params=None) -> MatchingBound:
    """Certified lower bound on ``match_count(v, w)`` from paired tower passes.

    Hits are paired in order; each pair of aligned even blocks of length
    ``h`` contributes its positionwise agreements (``h`` when both passes go
    through a monochromatic tower), and the odd blocks between them
    contribute their LCS.  Concatenating these matchings gives a common
    subsequence, so the value never exceeds the exact LCS.
    """
    v = check_word(np.asarray(vname))
    w = check_word(np.asarray(wname))
    h = check_positive_int(h, "h")
    params = dict(params or {})
    c = params.get("c", default_c(params.get("alpha", 0.0)))
    hv = _check_hits(base_hits_v, h, v.size, "base_hits_v")
    hw = _check_hits(base_hits_w, h, w.size, "base_hits_w")
    L = min(len(hv), len(hw))
    hv, hw = hv[:L], hw[:L]
    tower = odd = 0
    pv = pw = 0
    for i, j in zip(hv, hw):
        odd += lcs_bitparallel(v[pv:i], w[pw:j])
        tower += int(np.count_nonzero(v[i:i + h] == w[j:j + h]))
        pv, pw = i + h, j + h
    odd += lcs_bitparallel(v[pv:], w[pw:])
    return MatchingBound(tower + odd, L, tower, odd, float(c))


def height_condition(h, N, delta):
    """The hypothesis ``h > 2N / delta`` of the matching argument, as ``(passed, lhs, rhs)``."""
    rhs = 2 * N / delta
    return h > rhs, h, rhs


# -- names and towers ----------------------------------------------------------------

@dataclass
class NamesTowersReport:
    n: int
    delta_tower: float
    pairs: int
    violations: int
    exceptional_fraction: float
    max_excess: float

    def to_dict(self):
        return dict(self.__dict__)


def q_names(tower: RokhlinTower, part: CubePartition, points, n):
    """Names for ``Q = T cup P|_(T^c)``: levels are symbols ``-1 - k``, cells keep their index."""
    level = tower.level_flags(points, n)
    cells = np.empty_like(level)
    pts = np.asarray(points, dtype=np.float64)
    for i in range(n):
        cells[:, i] = part.classify(pts)
        if i + 1 < n:
            pts = tower.map.step(pts)
    return np.where(level >= 0, -1 - level, cells), cells, level


def names_and_towers_check(tower: RokhlinTower, part: CubePartition, n, *, samples=200, seed=None, labels=None, delta_value=None) -> NamesTowersReport:
    """Check ``d_n^P(x, y) <= d_n^Q(x, y) + 3 Delta`` on sampled pairs from the recurrence set ``W``.

    ``W`` holds the points visiting the difference set at most ``1.5 Delta n``
    times before ``n``; the fraction of samples outside ``W`` is reported.
    """
    n = check_positive_int(n, "n")
    if labels is None or delta_value is None:
        rep = monochromaticity(tower, part, max(samples, 1000), seed)
        labels, delta_value = rep.labels, rep.delta.value
    rng = stream(seed, "towers/names")
    pts = tower.map.sample(samples, rng)
    qn, pn, level = q_names(tower, part, pts, n)
    lab = np.asarray(labels)
    inD = (level >= 0) & (pn != lab[np.maximum(level, 0)])
    visits = inD.sum(axis=1)
    inW = visits <= 1.5 * delta_value * n
    idx = np.flatnonzero(inW)
    viol, pairs, excess = 0, 0, -math.inf
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            x, y = idx[a], idx[b]
            dp = np.mean(pn[x] != pn[y])
            dq = np.mean(qn[x] != qn[y])
            excess = max(excess, dp - dq - 3 * delta_value)
            viol += dp > dq + 3 * delta_value + 1e-12
            pairs += 1
    return NamesTowersReport(n, float(delta_value), pairs, int(viol), float(1 - inW.mean()), float(excess))


def translation_tower(spec: RotationSpec, base: Box, h):
    """Tower for the constant-roof time-one map, which is the exact translation by ``(Omega, Omega', 0)``."""
    return RokhlinTower(base, h, Translation.from_rotation(spec))


def periodic_toy_towers():
    """Heights ``(3, 2)``: ``F^+ = [0, 1/3) x T x T`` under ``Omega = 1/3`` and ``F^- = T x [0, 1/2) x T`` under ``Omega' = 1/2``."""
    T = Translation((Fraction(1, 3), Fraction(1, 2), Fraction(0)))
    fp = Box((Fraction(0), Fraction(0), Fraction(0)), (Fraction(1, 3), 1, 1), half_open=True)
    fm = Box((Fraction(0), Fraction(0), Fraction(0)), (1, Fraction(1, 2), 1), half_open=True)
    return RokhlinTower(fp, 3, T), RokhlinTower(fm, 2, T)


def slab_return_time(spec: RotationSpec, width):
    """First ``k >= 1`` with ``||k Omega|| <= width``: the return time of an x-slab of that width."""
    w = spec.omega[0]
    k = 1
    width = Fraction(width)
    while True:
        r = (k * w) % 1
        if min(r, 1 - r) <= width:
            return k
        k += 1


def lb_step_cap(law="(n+1)^-0.25", threshold=0.5, mode="single", limit=10**7):
    """Pre-registration helper: run the recursion until it crosses ``threshold``."""
    expr = parse_law(law)
    f = sympy.lambdify(_N, expr, "math")
    alpha = 0.0
    for n in range(limit):
        s = float(f(n + 1))
        factor = s * s if mode == "single" else (s * s / 2) ** 2
        alpha += factor * ((1 - alpha) / 10) ** 2
        if alpha >= threshold:
            return n + 1
    return None
