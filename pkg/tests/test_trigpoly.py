import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbarlab.errors import InvalidInputError, NearResonanceError
from fbarlab.rotation import RotationSpec
from fbarlab.trigpoly import (
    TrigPoly,
    birkhoff_bound,
    birkhoff_sum,
    derivative,
    evaluate,
    evaluate_direct,
    evaluate_grid,
    norm_bound,
    small_divisors,
    solve_cohomological,
)

SPEC = RotationSpec((1,) * 30, (2,) * 20)
seeds = st.integers(0, 2**32 - 1)


def test_cosine_values():
    P = TrigPoly.cosine((1,), 2.0)
    x = np.array([0.0, 0.25, 0.5])
    assert np.allclose(P(x), [2.0, 0.0, -2.0], atol=1e-15)


def test_hermitian_check():
    with pytest.raises(InvalidInputError):
        TrigPoly(1, {(1,): 1.0})


@settings(max_examples=25)
@given(seeds, st.integers(1, 6))
def test_real_valued_and_zero_mean(seed, degree):
    rng = np.random.default_rng(seed)
    P = TrigPoly.random(2, degree, rng)
    assert P.mean == 0.0
    grid = 4 * degree + 4
    x = (np.arange(grid) + 0.5) / grid
    theta = np.stack(np.meshgrid(x, x, indexing="ij"), -1).reshape(-1, 2)
    assert abs(np.mean(P(theta))) < 1e-12


@settings(max_examples=20)
@given(seeds)
def test_lattice_evaluation_matches_direct(seed):
    rng = np.random.default_rng(seed)
    q = int(rng.integers(1, 30))
    half = {(q * j,): complex(*rng.normal(size=2)) / j for j in range(1, int(rng.integers(64, 300)))}
    P = TrigPoly.from_half(1, half)
    x = rng.random(500)
    scale = sum(abs(c) for c in half.values())
    assert np.max(np.abs(evaluate(P, x) - evaluate_direct(P, x))) <= 1e-12 * scale


def test_sparse_lattice_falls_back():
    P = TrigPoly.from_half(1, {(k,): 1.0 for k in [1] + [10**6 + i for i in range(70)]})
    x = np.linspace(0, 1, 33)
    assert np.allclose(evaluate(P, x), evaluate_direct(P, x), atol=1e-9)


def test_grid_evaluation_matches_pointwise():
    P = TrigPoly.random(1, 7, np.random.default_rng(1))
    n = 64
    assert np.allclose(evaluate_grid(P, n), P(np.arange(n) / n), atol=1e-13)


@settings(max_examples=20)
@given(seeds, st.integers(0, 1))
def test_derivative_matches_central_difference(seed, axis):
    rng = np.random.default_rng(seed)
    P = TrigPoly.random(2, 3, rng)
    theta = rng.random((20, 2))
    h = 1e-6
    e = np.zeros(2)
    e[axis] = h
    fd = (P(theta + e) - P(theta - e)) / (2 * h)
    assert np.allclose(derivative(P, axis)(theta), fd, atol=1e-5 * (1 + norm_bound(P, 1)))


def test_norm_bound_dominates_sup():
    P = TrigPoly.random(2, 4, np.random.default_rng(3))
    theta = np.random.default_rng(4).random((5000, 2))
    assert np.max(np.abs(P(theta))) <= norm_bound(P, 0) + 1e-12
    assert norm_bound(P, 2) >= norm_bound(P, 1) >= norm_bound(P, 0)


@settings(max_examples=30)
@given(seeds, st.integers(1, 8))
def test_cohomological_equation(seed, degree):
    rng = np.random.default_rng(seed)
    P = TrigPoly.random(2, degree, rng)
    Q = solve_cohomological(P, SPEC)
    theta = rng.random((200, 2))
    shifted = np.mod(theta + np.asarray(SPEC.omega_float), 1.0)
    assert np.max(np.abs(P(theta) - Q(shifted) + Q(theta))) <= 1e-10 * norm_bound(P, 0)
    assert Q.mean == 0.0


def test_cohomological_one_dimensional_axes():
    P = TrigPoly.random(1, 5, np.random.default_rng(5))
    x = np.random.default_rng(6).random(100)
    for axis, w in (("x", SPEC.omega_float[0]), ("y", SPEC.omega_float[1])):
        Q = solve_cohomological(P, SPEC, axis=axis)
        assert np.allclose(P(x), Q(np.mod(x + w, 1.0)) - Q(x), atol=1e-11)


def test_resonance_is_reported():
    spec = RotationSpec((3,), (2,))  # omega = (1/3, 1/2)
    P = TrigPoly.from_half(2, {(3, 0): 1.0})
    assert small_divisors(P, spec).min() < 1e-12
    with pytest.raises(NearResonanceError) as info:
        solve_cohomological(P, spec)
    assert info.value.k in ((3, 0), (-3, 0))


def test_nonzero_mean_rejected():
    with pytest.raises(InvalidInputError):
        solve_cohomological(TrigPoly.constant(2, 1.0), SPEC)


@settings(max_examples=15)
@given(seeds)
def test_birkhoff_sum_telescopes(seed):
    rng = np.random.default_rng(seed)
    P = TrigPoly.random(2, 4, rng)
    Q = solve_cohomological(P, SPEC)
    theta = rng.random((8, 2))
    ms = [0, 1, 7, 300, 2000]
    sums = birkhoff_sum(P, SPEC, ms, theta)
    for m, row in zip(ms, sums):
        off = np.array([SPEC.offsets(m, "x"), SPEC.offsets(m, "y")])
        assert np.allclose(row, Q(np.mod(theta + off, 1.0)) - Q(theta), atol=1e-10)
        assert np.max(np.abs(row)) <= birkhoff_bound(P, SPEC, m, 0) + 1e-9


def test_birkhoff_sum_scalar_and_sequence_agree():
    P = TrigPoly.random(2, 2, np.random.default_rng(8))
    theta = np.random.default_rng(9).random((3, 2))
    seq = birkhoff_sum(P, SPEC, [5, 50], theta)
    assert np.allclose(seq[1], birkhoff_sum(P, SPEC, 50, theta), rtol=0, atol=1e-12)


def test_birkhoff_sum_rejects_decreasing_m():
    P = TrigPoly.random(2, 2, np.random.default_rng(8))
    with pytest.raises(InvalidInputError):
        birkhoff_sum(P, SPEC, [5, 3], np.zeros((1, 2)))


def test_json_round_trip():
    P = TrigPoly.random(2, 3, np.random.default_rng(10))
    R = TrigPoly.from_json(P.to_json(), dim=2)
    theta = np.random.default_rng(11).random((50, 2))
    assert np.allclose(P(theta), R(theta), atol=1e-15)


def test_arithmetic():
    rng = np.random.default_rng(12)
    P, R = TrigPoly.random(2, 2, rng), TrigPoly.random(2, 3, rng)
    theta = rng.random((30, 2))
    assert np.allclose((P + R)(theta), P(theta) + R(theta))
    assert np.allclose((P - R)(theta), P(theta) - R(theta))
    assert np.allclose((P * 2.5)(theta), 2.5 * P(theta))
    assert np.allclose((-P)(theta), -P(theta))
    assert math.isclose(norm_bound(P * 2.0, 0), 2 * norm_bound(P, 0))
