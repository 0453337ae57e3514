import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbarlab.errors import InvalidInputError, InvalidRoofError, NoFeasibleEtaError
from fbarlab.roof import (
    BUMP_INTEGRAL,
    RoofFunction,
    XiProfile,
    assemble_roof,
    build_P_mu_n,
    bump,
    eta_window,
    kernel_transform,
    mollified_profile,
    phi0,
    plateau_regions,
    select_eta,
)
from fbarlab.rotation import RotationSpec, surrogate_rotation
from fbarlab.trigpoly import TrigPoly

TOY = surrogate_rotation(8, 4, (1, 1, 1, 1, 200))  # q_4 = 5, q_5 = 1003


def test_bump_integral_constant():
    val = mpmath.quad(lambda u: mpmath.exp(-1 / (1 - u * u)), [-1, 0, 1])
    assert BUMP_INTEGRAL == pytest.approx(float(val), rel=1e-14)
    u = np.linspace(-1, 1, 200001)
    assert np.sum(bump(u)) * (u[1] - u[0]) == pytest.approx(1.0, abs=1e-10)


def test_kernel_transform_matches_quadrature():
    nus = np.array([0.0, 0.3, 1.7, 4.0])
    vals, err = kernel_transform(nus)
    assert err < 1e-13
    for nu, v in zip(nus, vals):
        ref = mpmath.quad(lambda u: mpmath.exp(-1 / (1 - u * u)) * mpmath.cos(2 * mpmath.pi * nu * u), [-1, 0, 1])
        assert v == pytest.approx(float(ref) / BUMP_INTEGRAL, abs=1e-12)


@pytest.mark.parametrize("q", [3, 5, 8, 21])
def test_eta_window_and_selection(q):
    lo, hi = eta_window(q)
    assert float(lo) == pytest.approx(4 * math.exp(q) / (3 * q))
    assert float(hi) == pytest.approx(2 * math.exp(q) / q)
    spec = RotationSpec((1,) * 10, (1,) * 10)
    n = spec.q_x.index(q)
    choice = select_eta(n, spec)
    assert choice.inv_eta % (2 * q) == 0
    assert lo <= choice.inv_eta <= hi
    assert choice.inv_eta - 2 * q < lo  # smallest admissible multiple


def test_eta_infeasible_for_tiny_q():
    # q = 2: the window [4.93, 7.39] holds no multiple of 4
    spec = RotationSpec((1, 1, 1), (1,))
    with pytest.raises(NoFeasibleEtaError) as info:
        select_eta(2, spec)
    assert info.value.scanned[0] == pytest.approx(4 * np.e**2 / 6)


@settings(max_examples=20)
@given(st.integers(1, 12), st.floats(0.01, 0.24))
def test_xi_fourier_closed_form_matches_fft(q, mu):
    xi = XiProfile(q, mu, 0.01)
    N = 4096
    t = np.arange(N) / N
    samples = xi(t / q)  # one period in t = q x
    fft = np.fft.fft(samples) / N
    js = np.arange(1, 20)
    # the sampled trapezoid aliases at O(slope / N^2)
    slope = xi.eta / (0.25 - mu)
    assert np.allclose(xi.fourier(js), fft[js], atol=slope / N**2)


def test_xi_shape():
    xi = XiProfile(5, 0.05, 0.02)
    assert xi(np.array([0.0]))[0] == 0.0
    assert xi(np.array([0.05]))[0] == pytest.approx(0.02)  # t = 1/4 is on the plateau
    assert xi(np.array([0.15]))[0] == pytest.approx(-0.02)
    assert xi.slope == pytest.approx(4 * 5 * 0.02 / 0.8)


def test_plateau_regions_partition():
    t = np.linspace(0, 1, 1001)
    regions = plateau_regions(t, 0.05)
    for r in regions:
        assert r.dtype == bool
    assert not np.any(regions[0] & regions[1])


def test_plateau_polynomial_fourier_matches_direct_mollification():
    pp = build_P_mu_n(4, 0.05, TOY)
    x = np.random.default_rng(0).random(40)
    direct = mollified_profile(pp, x)
    # the gap is the truncation tail plus quadrature error of the direct route
    assert np.max(np.abs(pp(x) - direct)) <= pp.details["tail_norm_bound"] + 1e-9


def test_plateau_polynomial_structure():
    pp = build_P_mu_n(4, 0.05, TOY)
    assert pp.q == 5 and pp.q_next == 1003 and pp.inv_eta == 40
    assert pp.poly.mean == 0.0
    assert all(int(k[0]) % 5 == 0 and 0 < abs(int(k[0])) < 1003 for k in pp.poly.keys)
    assert pp.flags[1]
    assert set(pp.margins) == {1, 2, 3, 4, "tail"}
    for k, v in pp.margins.items():
        assert pp.flags[k] == (v >= 0)


def test_plateau_input_validation():
    with pytest.raises(InvalidInputError):
        build_P_mu_n(4, 0.3, TOY)
    with pytest.raises(InvalidInputError):
        build_P_mu_n(5, 0.05, TOY)


def test_phi0_terms():
    spec = surrogate_rotation(2.0, 5, (1,))
    roof = phi0(spec, 2)
    assert [t.tag for t in roof.x_terms] == ["X", "X"]
    assert roof.mean == 1.0
    x = np.array([[0.3, 0.7]])
    want = 1 + sum(math.exp(-q) * math.cos(2 * math.pi * q * 0.3) for q in spec.q_x[1:3])
    want += sum(math.exp(-q) * math.cos(2 * math.pi * q * 0.7) for q in spec.q_y[1:3])
    assert roof(x)[0] == pytest.approx(want, abs=1e-14)


def test_substitution_replaces_x_term():
    pp = build_P_mu_n(4, 0.05, TOY)
    roof = assemble_roof(TOY, None, {4: pp}, depth=4)
    assert [t.tag for t in roof.x_terms] == ["X", "X", "X", "P_mu"]
    assert roof.x_terms[3].params["inv_eta"] == 40


def test_rectangle_integral_against_grid():
    spec = surrogate_rotation(2.0, 5, (1,))
    base = TrigPoly.random(2, 2, np.random.default_rng(1), scale=0.05)
    roof = assemble_roof(spec, base, None, 2)
    x0, x1, y0, y1 = 0.8, 1.3, 0.1, 0.45  # wraps in x
    n = 1200
    xs = x0 + (np.arange(n) + 0.5) / n * (x1 - x0)
    ys = y0 + (np.arange(n) + 0.5) / n * (y1 - y0)
    X, Y = np.meshgrid(np.mod(xs, 1), ys, indexing="ij")
    grid = roof(np.stack([X, Y], -1)).mean() * (x1 - x0) * (y1 - y0)
    assert roof.rectangle_integral(x0, x1, y0, y1) == pytest.approx(grid, rel=1e-6)


def test_negative_roof_rejected():
    spec = surrogate_rotation(2.0, 5, (1,))
    with pytest.raises(InvalidRoofError):
        assemble_roof(spec, TrigPoly.cosine((1, 0), 2.0), None, 1)


def test_roof_json_round_trip():
    pp = build_P_mu_n(4, 0.05, TOY)
    roof = assemble_roof(TOY, None, {4: pp}, depth=4)
    back = RoofFunction.from_json(roof.to_json())
    theta = np.random.default_rng(2).random((50, 2))
    assert np.allclose(roof(theta), back(theta), atol=1e-15)
    assert back.x_terms[3].tag == "P_mu"


def test_derivative_of_roof():
    spec = surrogate_rotation(2.0, 5, (1,))
    roof = phi0(spec, 2)
    theta = np.random.default_rng(3).random((20, 2))
    h = 1e-6
    for axis in (0, 1):
        e = np.zeros(2)
        e[axis] = h
        fd = (roof(theta + e) - roof(theta - e)) / (2 * h)
        assert np.allclose(roof.derivative(axis)(theta), fd, atol=1e-6)
