from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbarlab.boxes import Box
from fbarlab.diagnostics import (
    box_overlap,
    check_mixing_criterion,
    correlation,
    default_radius,
    derivative_birkhoff,
    excluded_intervals,
    in_criterion_set,
    translation_correlation,
)
from fbarlab.errors import CapExceededError, InvalidInputError
from fbarlab.flow import TimeOneMap
from fbarlab.maps import IdentityMap, Translation
from fbarlab.roof import assemble_roof, build_P_mu_n, phi0
from fbarlab.rotation import surrogate_rotation

SPEC = surrogate_rotation(2.0, 5, (1,))
TOY = surrogate_rotation(8, 4, (1, 1, 1, 1, 200))


def test_identity_correlation_is_variance():
    A = Box((0.0, 0.0, 0.0), (0.5, 1.0, 1.0))
    s = correlation(IdentityMap(), A, A, [0, 3], 20000, 0)
    assert s.values[0] == pytest.approx(0.25, abs=0.01)
    assert s.mu_A == 0.5


def test_disjoint_boxes_under_identity():
    A = Box((0.0, 0.0, 0.0), (0.5, 1.0, 1.0))
    B = Box((0.5, 0.0, 0.0), (0.5, 1.0, 1.0), half_open=True)
    s = correlation(IdentityMap(), A, B, [0], 20000, 0)
    assert s.signed[0] == pytest.approx(-0.25, abs=0.01)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_translation_correlation_closed_form_matches_monte_carlo(seed):
    rng = np.random.default_rng(seed)
    T = Translation.from_rotation(SPEC)
    A = Box(tuple(rng.random(3)), tuple(rng.uniform(0.2, 0.8, 3)))
    B = Box(tuple(rng.random(3)), tuple(rng.uniform(0.2, 0.8, 3)))
    lags = [0, 1, 5, 40]
    exact = translation_correlation(T, A, B, lags)
    mc = correlation(T, A, B, lags, 40000, seed)
    for e, m, se in zip(exact, mc.signed, mc.se):
        assert abs(e - m) <= 5 * se + 1e-3


def test_box_overlap_exact():
    A = Box((Fraction(0), Fraction(0)), (Fraction(1, 2), Fraction(1, 2)))
    B = Box((Fraction(1, 4), Fraction(3, 4)), (Fraction(1, 2), Fraction(1, 2)))
    assert box_overlap(A, B) == Fraction(1, 16)


def test_correlation_under_special_flow_is_seeded_and_sorted():
    G = TimeOneMap.build(phi0(SPEC, 2), SPEC)
    A = Box((0.0, 0.0, 0.0), (0.5, 0.5, 0.5))
    a = correlation(G, A, A, [0, 1, 4], 5000, 9)
    b = correlation(G, A, A, [0, 1, 4], 5000, 9)
    assert a.to_dict() == b.to_dict()
    assert a.signed[0] > 0
    with pytest.raises(InvalidInputError):
        correlation(G, A, A, [4, 1], 100, 0)


def test_criterion_set():
    r = 0.05
    t = np.array([0.0, 0.25, 0.28, 0.31, 0.5, 0.74, 0.9])
    assert in_criterion_set(t, r).tolist() == [True, False, False, True, True, False, True]
    assert np.allclose(excluded_intervals(r), [[0.2, 0.3], [0.7, 0.8]])
    assert not np.any(in_criterion_set(np.linspace(0, 1, 101), 0.3))


def test_default_radius():
    pp = build_P_mu_n(4, 0.05, TOY)
    roof = assemble_roof(TOY, None, {4: pp}, depth=4)
    assert default_radius(roof, 4) == pytest.approx(0.25)
    assert default_radius(roof, 2) == pytest.approx(0.5)


def test_criterion_report_for_analytic_roof():
    roof = phi0(SPEC, 3)
    rep = check_mixing_criterion(roof, SPEC, 2, [4, 40], grid=256, r=0.1, r_prime=0.1)
    assert [row["m"] for row in rep.rows] == [4, 40]
    for row in rep.rows + rep.rows_prime:
        assert row["passed"] == (row["min_abs_derivative"] >= row["bound"])
        assert row["margin"] == pytest.approx(row["min_abs_derivative"] - row["bound"])
    assert rep.points_used > 0
    d = rep.to_dict()
    assert d["q_n"] == SPEC.q_x[2]


def test_criterion_with_empty_set_does_not_pass_vacuously():
    roof = phi0(SPEC, 3)
    rep = check_mixing_criterion(roof, SPEC, 2, [4], grid=64, r=0.3, check_y=False)
    assert not rep.passed and rep.notes


def test_criterion_minimum_matches_direct_derivative():
    roof = phi0(SPEC, 3)
    rep = check_mixing_criterion(roof, SPEC, 2, [7], grid=64, y_grid=4, r=0.1, check_y=False)
    q = SPEC.q_x[2]
    xs = np.arange(64) / 64
    xs = xs[in_criterion_set(q * xs, 0.1)]
    ys = (np.arange(4) + 0.5) / 4
    theta = np.stack(np.meshgrid(xs, ys, indexing="ij"), -1).reshape(-1, 2)
    # independent route: central differences of the Birkhoff sum itself
    from fbarlab.trigpoly import birkhoff_sum
    h = 1e-6
    e = np.array([h, 0.0])
    fd = (birkhoff_sum(roof, SPEC, 7, theta + e) - birkhoff_sum(roof, SPEC, 7, theta - e)) / (2 * h)
    assert rep.rows[0]["min_abs_derivative"] == pytest.approx(np.min(np.abs(fd)), abs=1e-5)
    assert np.allclose(derivative_birkhoff(roof, SPEC, 7, theta), fd, atol=1e-5)


def test_criterion_cap_and_validation():
    roof = phi0(SPEC, 3)
    with pytest.raises(CapExceededError):
        check_mixing_criterion(roof, SPEC, 2, [10**7])
    with pytest.raises(InvalidInputError):
        check_mixing_criterion(roof, SPEC, 9, [5])
    with pytest.raises(InvalidInputError):
        check_mixing_criterion(roof, SPEC, 2, [0])
