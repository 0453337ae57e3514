"""Partitions of T^3, P-names, and the Hamming and f-bar distances between names.

``fbar(v, w) = (n - l) / n`` with ``l`` the length of a longest common
subsequence.  Several exact LCS kernels are provided:

* :func:`lcs_bitparallel` - bit-vector algorithm on Python integers,
  ``O(n m / wordsize)``; the default.
* :func:`lcs_dp` - the textbook dynamic programme with one numpy row,
  ``O(n m)`` time and ``O(m)`` memory; the reference.
* :func:`lcs_banded` - the programme restricted to a diagonal band, which is
  exact whenever the band is not saturated (certified on return).
* :func:`lcs_batch` - many equal-length pairs at once, vectorised across pairs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ._stats import stream
from ._validation import check_points, check_positive_int, check_unit_interval, check_word, check_words
from .boxes import Box
from .errors import InvalidInputError


# -- partitions --------------------------------------------------------------

@dataclass(frozen=True)
class CubePartition:
    """The ``2^{dim * level}`` half-open dyadic cubes, numbered from 1 in lexicographic order."""

    level: int
    dim: int = 3

    def __post_init__(self):
        check_positive_int(self.level, "level", minimum=0)
        check_positive_int(self.dim, "dim")

    @property
    def n_cells(self):
        return 2 ** (self.dim * self.level)

    @property
    def side(self):
        return 2**self.level

    def classify(self, points):
        """1-based cell index of each point (lower-closed convention on cube faces)."""
        single = np.ndim(points) == 1
        pts = check_points(points, self.dim)
        idx = np.minimum(np.floor(np.mod(pts, 1.0) * self.side).astype(np.int64), self.side - 1)
        code = np.zeros(len(pts), dtype=np.int64)
        for i in range(self.dim):
            code = code * self.side + idx[:, i]
        code += 1
        return int(code[0]) if single else code

    def cell_box(self, index):
        if not 1 <= index <= self.n_cells:
            raise InvalidInputError(f"cell index must lie in 1..{self.n_cells}")
        code = index - 1
        digits = []
        for _ in range(self.dim):
            digits.append(code % self.side)
            code //= self.side
        digits.reverse()
        return Box(tuple(d / self.side for d in digits), (1 / self.side,) * self.dim, half_open=True)

    def parent(self, index):
        """Index of the cell of the level ``n - 1`` partition containing cell ``index``."""
        if self.level == 0:
            raise InvalidInputError("level-0 partition has no parent")
        centre = np.asarray(self.cell_box(index).lo) + 0.5 / self.side
        return CubePartition(self.level - 1, self.dim).classify(centre)


# -- words ---------------------------------------------------------------------

@dataclass(frozen=True)
class Word:
    """A finite word over ``{1..m}`` (``m`` optional)."""

    symbols: tuple
    alphabet: int | None = None

    def __post_init__(self):
        syms = tuple(int(s) for s in self.symbols)
        if any(s < 1 for s in syms):
            raise InvalidInputError("symbols must be >= 1")
        if self.alphabet is not None and any(s > self.alphabet for s in syms):
            raise InvalidInputError(f"symbols must lie in 1..{self.alphabet}")
        object.__setattr__(self, "symbols", syms)

    @classmethod
    def from_string(cls, text, alphabet=None):
        return cls(tuple(int(c) for c in text.strip()), alphabet)

    @classmethod
    def from_csv(cls, text, alphabet=None):
        text = text.strip()
        return cls(tuple(int(v) for v in text.split(",")) if text else (), alphabet)

    def to_csv(self):
        return ",".join(str(s) for s in self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __add__(self, other):
        return Word(self.symbols + as_word(other).symbols)

    def __iter__(self):
        return iter(self.symbols)

    def array(self):
        return np.asarray(self.symbols, dtype=np.int64)


def as_word(v):
    if isinstance(v, Word):
        return v
    return Word(tuple(_arr(v).tolist()))


def _arr(v):
    if isinstance(v, Word):
        return v.array()
    if isinstance(v, str):
        return np.asarray([int(c) for c in v], dtype=np.int64)
    v = np.asarray(v)
    if v.size == 0:
        return np.zeros(0, dtype=np.int64)
    return check_word(v)


# -- names ---------------------------------------------------------------------

def p_names(T, part: CubePartition, points, n):
    """``(len(points), n)`` array of names ``classify(T^i q)`` for ``0 <= i < n``."""
    n = check_positive_int(n, "n")
    pts = check_points(points, part.dim)
    out = np.empty((len(pts), n), dtype=np.int64)
    for i in range(n):
        out[:, i] = part.classify(pts)
        if i + 1 < n:
            pts = T.step(pts)
    return out


def p_name(T, part: CubePartition, q, n) -> Word:
    return Word(tuple(p_names(T, part, np.asarray(q, dtype=np.float64)[None, :], n)[0]), part.n_cells)


# -- distances -------------------------------------------------------------------

def hamming(v, w):
    a, b = _arr(v), _arr(w)
    if a.size != b.size:
        raise InvalidInputError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise InvalidInputError("words must be non-empty")
    return float(np.count_nonzero(a != b)) / a.size


def lcs_bitparallel(v, w):
    """LCS length with the bit-vector recurrence ``V <- (V + U) | (V - U)``, ``U = V & M[c]``."""
    a, b = _arr(v), _arr(w)
    if a.size == 0 or b.size == 0:
        return 0
    if a.size < b.size:
        a, b = b, a
    masks = {}
    for i, c in enumerate(a.tolist()):
        masks[c] = masks.get(c, 0) | (1 << i)
    full = (1 << a.size) - 1
    V = full
    for c in b.tolist():
        M = masks.get(c)
        if M is None:
            continue
        U = V & M
        V = ((V + U) | (V - U)) & full
    return a.size - bin(V).count("1")


def lcs_dp(v, w):
    """Reference LCS: one row at a time, ``row = cummax(max(prev, shifted prev + match))``."""
    a, b = _arr(v), _arr(w)
    if a.size == 0 or b.size == 0:
        return 0
    if a.size < b.size:
        a, b = b, a
    prev = np.zeros(b.size + 1, dtype=np.int64)
    for c in a:
        eq = (b == c).astype(np.int64)
        cand = np.maximum(prev[1:], prev[:-1] + eq)
        prev[1:] = np.maximum.accumulate(cand)
    return int(prev[-1])


@dataclass(frozen=True)
class BandedLCS:
    value: int
    band: int
    certified: bool


def lcs_banded(v, w, band):
    """LCS restricted to alignments with ``|i - j| <= band``.

    The value is always a valid common-subsequence length.  It equals the
    true LCS when ``value >= max(len) - band``: an optimal alignment leaves at
    most ``max(len) - lcs`` symbols unmatched, which bounds its offset.
    """
    a, b = _arr(v), _arr(w)
    band = check_positive_int(band, "band", minimum=0)
    n, m = a.size, b.size
    if n == 0 or m == 0:
        return BandedLCS(0, band, True)
    row = np.zeros(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        lo, hi = max(1, i - band), min(m, i + band)
        if lo > hi:
            continue
        eq = (b[lo - 1:hi] == a[i - 1]).astype(np.int64)
        cand = np.maximum(row[lo:hi + 1], row[lo - 1:hi] + eq)
        cand[0] = max(cand[0], row[lo - 1])
        row[lo:hi + 1] = np.maximum.accumulate(cand)
    value = int(row.max())
    return BandedLCS(value, band, value >= max(n, m) - band)


def lcs_batch(A, B):
    """LCS lengths of the pairs ``(A[i], B[i])``, vectorised across pairs."""
    A, B = check_words(A, "A"), check_words(B, "B")
    if A.shape[0] != B.shape[0]:
        raise InvalidInputError("A and B must hold the same number of words")
    k, m = B.shape
    if A.shape[1] == 0 or m == 0:
        return np.zeros(k, dtype=np.int64)
    prev = np.zeros((k, m + 1), dtype=np.int32)
    for i in range(A.shape[1]):
        eq = (B == A[:, i:i + 1]).astype(np.int32)
        cand = np.maximum(prev[:, 1:], prev[:, :-1] + eq)
        prev[:, 1:] = np.maximum.accumulate(cand, axis=1)
    return prev[:, -1].astype(np.int64)


def match_count(v, w, method="bitparallel"):
    """Length of a longest common subsequence (lengths may differ)."""
    if method == "bitparallel":
        return lcs_bitparallel(v, w)
    if method == "dp":
        return lcs_dp(v, w)
    raise InvalidInputError(f"unknown LCS method {method!r}")


def fbar(v, w, *, method="bitparallel", band=None):
    """``(n - l) / n`` for equal-length words.

    With ``band`` the banded programme runs first; if it cannot certify its
    value the exact kernel is used instead, so the result is always exact.
    """
    a, b = _arr(v), _arr(w)
    if a.size != b.size:
        raise InvalidInputError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise InvalidInputError("words must be non-empty")
    if band is not None:
        res = lcs_banded(a, b, band)
        if res.certified:
            return (a.size - res.value) / a.size
    return (a.size - match_count(a, b, method)) / a.size


def fbar_batch(A, B):
    A, B = check_words(A), check_words(B)
    if A.shape != B.shape:
        raise InvalidInputError("fbar_batch needs equal shapes")
    return (A.shape[1] - lcs_batch(A, B)) / A.shape[1]


def fbar_matrix(names, others=None):
    """Pairwise f-bar between rows of ``names`` and rows of ``others`` (default: ``names``)."""
    names = check_words(names)
    others = names if others is None else check_words(others)
    k, l = len(names), len(others)
    n = names.shape[1]
    ii, jj = np.meshgrid(np.arange(k), np.arange(l), indexing="ij")
    out = np.empty(k * l)
    chunk = max(1, (1 << 22) // max(1, n * n // 8 + n))
    fi, fj = ii.reshape(-1), jj.reshape(-1)
    for s in range(0, fi.size, chunk):
        out[s:s + chunk] = fbar_batch(names[fi[s:s + chunk]], others[fj[s:s + chunk]])
    return out.reshape(k, l)


@dataclass(frozen=True)
class DiameterReport:
    value: float
    pair: tuple
    n_points: int
    note: str = "maximum over sampled pairs; a lower bound for the supremum"


def fbar_diameter(points, T, part: CubePartition, n) -> DiameterReport:
    pts = check_points(points, part.dim)
    if len(pts) < 2:
        raise InvalidInputError("fbar_diameter needs at least two points")
    names = p_names(T, part, pts, n)
    best, pair = -1.0, (0, 1)
    for i, j in itertools.combinations(range(len(pts)), 2):
        d = fbar(names[i], names[j])
        if d > best:
            best, pair = d, (i, j)
    return DiameterReport(best, pair, len(pts))


# -- property P(alpha, delta, n) -------------------------------------------------

@dataclass
class PropertyPReport:
    verdict: str
    method: str | None
    alpha: float
    delta: float
    n: int
    radius: float
    best_fraction: float
    witness: list | None
    fractions: list = field(default_factory=list)
    shared_symbol: dict | None = None
    samples: int = 0
    centers: int = 0
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return self.verdict == "PASS"

    def to_dict(self):
        return dict(self.__dict__)


def estimate_property_P(T, part: CubePartition, alpha, delta, n, *, samples=1000, centers=10, seed=None, sampler=None) -> PropertyPReport:
    """Monte Carlo certificate for property ``P(alpha, delta, n)``.

    For each candidate centre ``x`` the fraction of sampled ``y`` with
    ``fbar_n(x, y) < (1 - alpha) / 2`` is measured; a fraction above
    ``1 - delta`` certifies, through the triangle inequality, a set of
    diameter ``< 1 - alpha``.  When ``alpha n < 1`` a second certificate is
    tried: names sharing one symbol are within ``1 - alpha`` of each other.
    """
    alpha = check_unit_interval(alpha, "alpha")
    delta = check_unit_interval(delta, "delta")
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidInputError("n must be a positive integer")
    samples = check_positive_int(samples, "samples")
    centers = check_positive_int(centers, "centers")
    draw = sampler if sampler is not None else T.sample
    ys = draw(samples, stream(seed, "property-p/samples"))
    xs = draw(centers, stream(seed, "property-p/centres"))
    if len(ys) == 0:
        raise InvalidInputError("empty sample")
    names_y = p_names(T, part, ys, n)
    names_x = p_names(T, part, xs, n)
    radius = (1 - alpha) / 2
    dist = fbar_matrix(names_x, names_y)
    fractions = np.mean(dist < radius, axis=1)
    best = int(np.argmax(fractions))
    report = PropertyPReport(
        verdict="FAIL", method=None, alpha=alpha, delta=delta, n=int(n), radius=radius,
        best_fraction=float(fractions[best]), witness=None, fractions=[float(f) for f in fractions],
        samples=samples, centers=centers,
    )
    report.notes.append("centre-ball radius (1 - alpha)/2 is sufficient, not necessary, for diameter < 1 - alpha")
    if fractions[best] > 1 - delta:
        report.verdict, report.method = "PASS", "centre-ball"
        report.witness = [float(c) for c in xs[best]]
    if alpha * n < 1:
        counts = np.array([np.any(names_y == s, axis=1).mean() for s in range(1, part.n_cells + 1)])
        s = int(np.argmax(counts)) + 1
        report.shared_symbol = {"symbol": s, "fraction": float(counts[s - 1])}
        if report.verdict == "FAIL" and counts[s - 1] > 1 - delta:
            report.verdict, report.method = "PASS", "shared-symbol"
    return report


def words_of_length(length, alphabet):
    """All ``alphabet**length`` words, one per row, in lexicographic order."""
    return np.array(list(itertools.product(range(1, alphabet + 1), repeat=length)), dtype=np.int64).reshape(-1, length)
