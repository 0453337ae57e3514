"""Independent reference computations used to derive frozen test values.

Nothing here imports fbarlab.  Run ``python tests/oracles.py`` to print the
values that the tests freeze.
"""

import itertools
from fractions import Fraction

import mpmath


def lb_crossing(exponent=mpmath.mpf("0.25"), threshold=0.5, prec=200, limit=10**5):
    """First n with alpha_n >= threshold for mu_n = (n+1)^-exponent, in high precision."""
    with mpmath.workprec(prec):
        alpha = mpmath.mpf(0)
        for n in range(limit):
            mu = mpmath.mpf(n + 2) ** (-exponent)
            alpha += mu**2 * ((1 - alpha) / 10) ** 2
            if alpha >= threshold:
                return n + 1
    return None


def lb_geometric_plateau(limit=200):
    """First n at which the float64 recursion for mu_n = 2^-n stops moving."""
    alpha = 0.0
    for n in range(limit):
        mu = 2.0 ** -(n + 1)
        nxt = alpha + mu * mu * ((1 - alpha) / 10) ** 2
        if nxt == alpha:
            return n
        alpha = nxt
    return None


def lcs_brute(a, b):
    """Longest common subsequence by enumerating subsequences of the shorter word."""
    if len(a) > len(b):
        a, b = b, a
    for r in range(len(a), -1, -1):
        for sub in itertools.combinations(a, r):
            it = iter(b)
            if all(c in it for c in sub):
                return r
    return 0


def convergents(quotients):
    """(p_n, q_n) from partial quotients [a_1, a_2, ...] of a number in (0, 1)."""
    p_prev, q_prev, p, q = 1, 0, 0, 1
    out = [(p, q)]
    for a in quotients:
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        out.append((p, q))
    return out


def fraction_from_quotients(quotients):
    x = Fraction(0)
    for a in reversed(quotients):
        x = 1 / (a + x)
    return x


if __name__ == "__main__":
    print("LB crossing", lb_crossing())
    print("LB geometric plateau", lb_geometric_plateau())
    print("convergents of [1]*10", convergents([1] * 10))
    print("lcs 'abcbdab' vs 'bdcaba'", lcs_brute("abcbdab", "bdcaba"))
