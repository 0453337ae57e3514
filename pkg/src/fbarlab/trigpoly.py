"""Real trigonometric polynomials on T^1 and T^2.

Coefficients are stored on the full Hermitian support (``p_{-k} = conj(p_k)``),
sorted lexicographically, with exact zeros dropped.  Evaluation uses the
half-plane form ``p_0 + 2 Re sum p_k e(k.theta)``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ._validation import check_points
from .errors import InvalidInputError, NearResonanceError
from .rotation import RotationSpec, dist_to_integers

TWO_PI = 2.0 * math.pi
DEFAULT_RESONANCE_FLOOR = 1e-30
_CHUNK_ELEMENTS = 1 << 21
_HORNER_MIN_TERMS = 64
_HORNER_BLOCK = 32


def _is_half(k):
    for c in k:
        if c > 0:
            return True
        if c < 0:
            return False
    return False


class TrigPoly:
    """Finite real Fourier series ``sum_k p_k exp(2 pi i k.theta)`` with ``d in {1, 2}``."""

    __slots__ = ("dim", "keys", "coefs", "_half_keys", "_half_coefs", "_p0")

    def __init__(self, dim, terms=None, *, hermitian_tol=1e-12):
        if dim not in (1, 2):
            raise InvalidInputError(f"dim must be 1 or 2, got {dim}")
        self.dim = dim
        terms = dict(terms or {})
        clean = {}
        for k, v in terms.items():
            k = (int(k),) if np.ndim(k) == 0 else tuple(int(c) for c in k)
            if len(k) != dim:
                raise InvalidInputError(f"frequency {k} does not have {dim} components")
            clean[k] = clean.get(k, 0) + complex(v)
        scale = max((abs(v) for v in clean.values()), default=0.0)
        for k, v in list(clean.items()):
            neg = tuple(-c for c in k)
            w = clean.get(neg, 0j)
            if abs(v - w.conjugate()) > hermitian_tol * max(scale, 1.0):
                raise InvalidInputError(f"coefficients at {k} and {neg} are not conjugate")
        keys = sorted(k for k, v in clean.items() if v != 0)
        self.keys = np.array(keys, dtype=np.int64).reshape(len(keys), dim)
        self.coefs = np.array([clean[k] for k in keys], dtype=np.complex128)
        if len(keys):
            self.coefs[np.all(self.keys == 0, axis=1)] = self.coefs[np.all(self.keys == 0, axis=1)].real
        half = [i for i, k in enumerate(keys) if _is_half(k)]
        self._half_keys = self.keys[half]
        self._half_coefs = self.coefs[half]
        self._p0 = float(clean.get((0,) * dim, 0j).real)

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_half(cls, dim, half_terms, constant=0.0):
        """Build from coefficients on one half-plane; the conjugates are implied."""
        terms = {(0,) * dim: constant} if constant else {}
        for k, v in half_terms.items():
            k = (int(k),) if np.ndim(k) == 0 else tuple(int(c) for c in k)
            if not _is_half(k):
                raise InvalidInputError(f"{k} is not in the positive half-plane")
            terms[k] = complex(v)
            terms[tuple(-c for c in k)] = complex(v).conjugate()
        return cls(dim, terms)

    @classmethod
    def cosine(cls, k, amplitude=1.0):
        """``amplitude * cos(2 pi k.theta)``."""
        k = (int(k),) if np.ndim(k) == 0 else tuple(int(c) for c in k)
        if not any(k):
            return cls(len(k), {k: amplitude})
        if not _is_half(k):
            k = tuple(-c for c in k)
        return cls.from_half(len(k), {k: amplitude / 2})

    @classmethod
    def constant(cls, dim, value):
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def random(cls, dim, degree, rng, *, zero_average=True, scale=1.0):
        """Random real polynomial with every frequency ``0 < |k|_1 <= degree`` populated."""
        half = {}
        for k in _frequencies(dim, degree):
            if _is_half(k):
                half[k] = complex(rng.normal(), rng.normal()) * scale / 2
        const = 0.0 if zero_average else float(rng.normal()) * scale
        return cls.from_half(dim, half, constant=const)

    # -- basic properties ---------------------------------------------------
    @property
    def degree(self):
        if not len(self.keys):
            return 0
        return int(np.max(np.sum(np.abs(self.keys), axis=1)))

    @property
    def mean(self):
        return self._p0

    @property
    def zero_average(self):
        return self._p0 == 0.0

    @property
    def is_constant(self):
        return not np.any(self.keys)

    def coefficient(self, k):
        k = (int(k),) if np.ndim(k) == 0 else tuple(int(c) for c in k)
        hit = np.all(self.keys == np.array(k), axis=1) if len(self.keys) else np.array([], bool)
        idx = np.flatnonzero(hit)
        return complex(self.coefs[idx[0]]) if idx.size else 0j

    def terms(self):
        return {tuple(int(c) for c in k): complex(v) for k, v in zip(self.keys, self.coefs)}

    def __repr__(self):
        return f"TrigPoly(dim={self.dim}, degree={self.degree}, n_terms={len(self.keys)})"

    # -- arithmetic ---------------------------------------------------------
    def _combine(self, other, sign):
        if isinstance(other, (int, float)):
            other = TrigPoly.constant(self.dim, other)
        if other.dim != self.dim:
            raise InvalidInputError("cannot combine polynomials of different dimension")
        terms = self.terms()
        for k, v in other.terms().items():
            terms[k] = terms.get(k, 0j) + sign * v
        return TrigPoly(self.dim, terms)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float, np.floating)):
            return NotImplemented
        return TrigPoly(self.dim, {k: v * float(scalar) for k, v in self.terms().items()})

    __rmul__ = __mul__

    # -- evaluation ---------------------------------------------------------
    def __call__(self, theta):
        return evaluate(self, theta)

    def derivative(self, axis=0):
        return derivative(self, axis)

    def norm_bound(self, r):
        return norm_bound(self, r)

    def to_json(self):
        return [{"k": [int(c) for c in k], "re": float(v.real), "im": float(v.imag)} for k, v in zip(self.keys, self.coefs)]

    @classmethod
    def from_json(cls, items, dim=None):
        items = list(items)
        if dim is None:
            if not items:
                raise InvalidInputError("dimension of an empty polynomial must be given")
            dim = len(items[0]["k"])
        try:
            return cls(dim, {tuple(it["k"]): complex(it["re"], it.get("im", 0.0)) for it in items})
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed polynomial entry: {exc}") from None


def _frequencies(dim, degree):
    if dim == 1:
        return [(k,) for k in range(-degree, degree + 1) if k]
    out = []
    for a in range(-degree, degree + 1):
        rem = degree - abs(a)
        for b in range(-rem, rem + 1):
            if a or b:
                out.append((a, b))
    return out


def _as_theta(P, theta):
    if P.dim == 1:
        arr = np.asarray(theta, dtype=np.float64)
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        return arr.reshape(-1), arr.shape
    arr = np.asarray(theta, dtype=np.float64)
    shape = arr.shape[:-1]
    return check_points(arr.reshape(-1, 2), 2, "theta"), shape


def evaluate(P: TrigPoly, theta):
    """Real value of ``P`` at ``theta``.

    For ``d = 1`` ``theta`` is any array of reals; for ``d = 2`` its last axis
    has length 2.  The result has the broadcast shape without that axis.
    """
    pts, shape = _as_theta(P, theta)
    out = np.full(pts.shape[0], P._p0, dtype=np.float64)
    keys, coefs = P._half_keys, P._half_coefs
    if P.dim == 1 and len(keys) >= _HORNER_MIN_TERMS:
        fast = _evaluate_lattice(keys[:, 0], coefs, pts)
        if fast is not None:
            out += fast
            return out.reshape(shape) if shape else float(out[0])
    if len(keys):
        step = max(1, _CHUNK_ELEMENTS // len(keys))
        for start in range(0, pts.shape[0], step):
            chunk = pts[start:start + step]
            phase = chunk[:, None] * keys[None, :, 0] if P.dim == 1 else chunk @ keys.T
            # reduce the phase before scaling by 2 pi to keep large degrees accurate
            phase = phase - np.round(phase)
            out[start:start + step] += 2.0 * (np.exp(1j * TWO_PI * phase) @ coefs).real
    return out.reshape(shape) if shape else float(out[0])


def _evaluate_lattice(ks, coefs, pts, block=_HORNER_BLOCK):
    """``2 Re sum c_k e(k x)`` for frequencies on a lattice ``g Z`` by blocked Horner.

    Powers ``w^i``, ``w = e(g x)``, are formed for ``i < block`` by repeated
    multiplication, each block of coefficients is applied as a matrix product,
    and the blocks are combined by Horner in ``w^block``.  Returns ``None``
    when the lattice is too sparse for this to pay off.
    """
    g = int(np.gcd.reduce(ks))
    idx = ks // g
    top = int(idx.max())
    if top > 32 * len(ks):
        return None
    nb = top // block + 1
    dense = np.zeros(nb * block, dtype=np.complex128)
    dense[idx] = coefs
    C = dense.reshape(nb, block)
    out = np.empty(pts.shape[0])
    step = 1 << 14
    for start in range(0, pts.shape[0], step):
        x = pts[start:start + step] * g
        w = np.exp(1j * TWO_PI * (x - np.round(x)))
        powers = np.empty((block, len(w)), dtype=np.complex128)
        powers[0] = 1.0
        for i in range(1, block):
            np.multiply(powers[i - 1], w, out=powers[i])
        wb = powers[-1] * w
        M = C @ powers
        acc = M[-1].copy()
        for b in range(nb - 2, -1, -1):
            acc *= wb
            acc += M[b]
        out[start:start + step] = 2.0 * acc.real
    return out


def evaluate_direct(P: TrigPoly, theta):
    """Term-by-term evaluation, the reference for the lattice fast path."""
    pts, shape = _as_theta(P, theta)
    out = np.full(pts.shape[0], P._p0, dtype=np.float64)
    keys, coefs = P._half_keys, P._half_coefs
    if len(keys):
        step = max(1, _CHUNK_ELEMENTS // len(keys))
        for start in range(0, pts.shape[0], step):
            chunk = pts[start:start + step]
            phase = chunk[:, None] * keys[None, :, 0] if P.dim == 1 else chunk @ keys.T
            phase = phase - np.round(phase)
            out[start:start + step] += 2.0 * (np.exp(1j * TWO_PI * phase) @ coefs).real
    return out.reshape(shape) if shape else float(out[0])


def evaluate_grid(P: TrigPoly, n_points):
    """Values of a one-dimensional ``P`` at ``j / n_points`` via an inverse FFT."""
    if P.dim != 1:
        raise InvalidInputError("evaluate_grid requires a one-dimensional polynomial")
    if n_points <= 2 * P.degree:
        raise InvalidInputError("grid too coarse for the polynomial degree")
    spectrum = np.zeros(n_points, dtype=np.complex128)
    idx = P.keys[:, 0] % n_points
    np.add.at(spectrum, idx, P.coefs)
    return (np.fft.ifft(spectrum) * n_points).real


def derivative(P: TrigPoly, axis=0) -> TrigPoly:
    if not 0 <= axis < P.dim:
        raise InvalidInputError(f"axis {axis} out of range for dimension {P.dim}")
    out = TrigPoly.__new__(TrigPoly)
    out.dim = P.dim
    factor = 2j * math.pi * P.keys[:, axis] if len(P.keys) else np.zeros(0)
    mask = factor != 0
    out.keys = P.keys[mask]
    out.coefs = (P.coefs * factor)[mask]
    half = np.array([_is_half(k) for k in out.keys], dtype=bool) if len(out.keys) else np.zeros(0, bool)
    out._half_keys = out.keys[half]
    out._half_coefs = out.coefs[half]
    out._p0 = 0.0
    return out


def norm_bound(P: TrigPoly, r) -> float:
    """``sum_k (2 pi |k|_1)^r |p_k|``, an upper bound on the ``C^r`` norm."""
    if r < 0:
        raise InvalidInputError("r must be non-negative")
    if not len(P.keys):
        return 0.0
    l1 = np.sum(np.abs(P.keys), axis=1).astype(np.float64)
    weights = np.where(l1 == 0, 1.0 if r == 0 else 0.0, (TWO_PI * l1) ** r)
    return float(np.sum(weights * np.abs(P.coefs)))


def bridge_constant(d, r) -> int:
    """``ceil((2 pi)^r * sum_{k != 0} |k|_1^{-(d+1)})``; the lattice sums are ``pi^2/3`` and ``2 pi^2/3``."""
    lattice = {1: math.pi**2 / 3, 2: 2 * math.pi**2 / 3}
    if d not in lattice:
        raise InvalidInputError("bridge_constant supports d in {1, 2}")
    return math.ceil(TWO_PI**r * lattice[d])


# -- rotation-dependent operations -------------------------------------------

def _frequency_vector(P, spec: RotationSpec, axis):
    if P.dim == 2:
        return spec.omega
    return (spec.axis_fraction(axis),)


def _phases(P, spec, axis):
    """``<k, omega> mod 1`` for every stored frequency, exact before rounding."""
    omega = _frequency_vector(P, spec, axis)
    out = np.empty(len(P.keys), dtype=np.float64)
    for i, k in enumerate(P.keys):
        s = sum((int(c) * w for c, w in zip(k, omega)), Fraction(0))
        out[i] = float(s - math.floor(s))
    return out


def small_divisors(P: TrigPoly, spec: RotationSpec, axis="x"):
    """``|exp(2 pi i <k, omega>) - 1|`` for every stored frequency."""
    return np.abs(np.exp(2j * math.pi * _phases(P, spec, axis)) - 1.0)


def solve_cohomological(P: TrigPoly, spec: RotationSpec, *, axis="x", floor=DEFAULT_RESONANCE_FLOOR) -> TrigPoly:
    """Return ``Q`` with ``P = Q o R_omega - Q`` and zero mean.

    ``q_k = p_k / (exp(2 pi i <k, omega>) - 1)``.  For one-dimensional ``P`` the
    rotation acts by ``Omega`` (``axis='x'``) or ``Omega'`` (``axis='y'``).
    """
    if P.mean != 0.0:
        raise InvalidInputError("solve_cohomological requires a zero-average polynomial")
    if not len(P.keys):
        return TrigPoly(P.dim)
    denom = np.exp(2j * math.pi * _phases(P, spec, axis)) - 1.0
    small = np.abs(denom) < floor
    if np.any(small):
        i = int(np.flatnonzero(small)[0])
        k = tuple(int(c) for c in P.keys[i])
        raise NearResonanceError(f"small divisor |e(<k,omega>) - 1| = {abs(denom[i]):.3e} at k = {k}", k=k, modulus=float(abs(denom[i])))
    out = TrigPoly.__new__(TrigPoly)
    out.dim = P.dim
    out.keys = P.keys.copy()
    out.coefs = P.coefs / denom
    # enforce exact conjugate symmetry after the division
    half = np.array([_is_half(k) for k in out.keys], dtype=bool)
    index = {tuple(k): i for i, k in enumerate(out.keys)}
    for i in np.flatnonzero(half):
        j = index[tuple(-out.keys[i])]
        out.coefs[j] = np.conj(out.coefs[i])
    out._half_keys = out.keys[half]
    out._half_coefs = out.coefs[half]
    out._p0 = 0.0
    return out


def translate_norm(spec: RotationSpec, m, dim=2, axis="x"):
    """``|||m omega|||`` with the l1 distance to the integer lattice."""
    if dim == 2:
        return float(sum(dist_to_integers(int(m) * w) for w in spec.omega))
    return float(dist_to_integers(int(m) * spec.axis_fraction(axis)))


def birkhoff_bound(P: TrigPoly, spec: RotationSpec, m, r, *, axis="x", floor=DEFAULT_RESONANCE_FLOOR) -> float:
    """``min(2 ||Q||_r, |||m omega||| ||Q||_{r+1})`` with norms replaced by :func:`norm_bound`."""
    Q = solve_cohomological(P, spec, axis=axis, floor=floor)
    return min(2.0 * norm_bound(Q, r), translate_norm(spec, m, P.dim, axis) * norm_bound(Q, r + 1))


def birkhoff_sum(f, spec: RotationSpec, m, theta, *, dim=None, axis="x", block=None):
    """Birkhoff sums ``sum_{j<m} f(theta + j omega)`` with compensated accumulation.

    ``f`` is any vectorised callable (a :class:`TrigPoly`, a roof function, ...).
    ``m`` may be an int or an increasing sequence of ints; in the latter case
    the result has a leading axis over ``m`` and all sums share one pass.
    Orbit points are formed from exact offsets ``j omega mod 1``, so there is
    no drift in the base point.
    """
    if dim is None:
        dim = getattr(f, "dim", 2)
    scalar_m = np.ndim(m) == 0
    ms = [int(m)] if scalar_m else [int(v) for v in m]
    if any(v < 0 for v in ms) or ms != sorted(ms):
        raise InvalidInputError("m must be non-negative (and increasing when a sequence)")
    if dim == 1:
        pts = np.asarray(theta, dtype=np.float64)
        shape = pts.shape
        pts = pts.reshape(-1)
    else:
        pts = np.asarray(theta, dtype=np.float64)
        shape = pts.shape[:-1]
        pts = pts.reshape(-1, 2)
    npts = pts.shape[0]
    if block is None:
        block = max(1, (1 << 18) // max(npts, 1))
    total = np.zeros(npts)
    comp = np.zeros(npts)
    results = []
    j = 0
    for target in ms:
        while j < target:
            js = np.arange(j, min(j + block, target))
            if dim == 1:
                orbit = np.mod(pts[None, :] + spec.offsets(js, axis)[:, None], 1.0)
            else:
                off = np.stack([spec.offsets(js, "x"), spec.offsets(js, "y")], axis=1)
                orbit = np.mod(pts[None, :, :] + off[:, None, :], 1.0)
            vals = np.asarray(f(orbit), dtype=np.float64).reshape(len(js), npts)
            # Kahan step on the block partial sum (numpy sums pairwise inside a block)
            y = vals.sum(axis=0) - comp
            t = total + y
            comp = (t - total) - y
            total = t
            j = js[-1] + 1
        results.append(total.copy())
    out = np.array(results).reshape((len(ms),) + shape)
    return out[0] if scalar_m else out
