import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from rikit.gridfn import GridFunction, ParameterError, make_grid, pairing, quad_rule, rearrange
from rikit.operators import (
    G_rows,
    H_m_at,
    H_m_indicator_closed_form,
    KernelOp,
    R_m_at,
    apply_G_m,
    apply_H,
    apply_H_m,
    apply_P_phi,
    apply_R,
    apply_R_m,
    compose_H,
    operator_matrix,
)
from rikit.profiles import gauss_phi, gauss_profile, linear_profile, power_profile

GRID = make_grid(K=16, t_min=2.0 ** -40)
SMALL = make_grid(K=4, t_min=2.0 ** -20)
ONE = GridFunction.constant(GRID)
PROFILES = [power_profile(0.5), power_profile(0.75), linear_profile(), gauss_profile()]


def _cell_avg(fn, grid):
    qr = quad_rule(grid)
    return qr.average(fn(qr.t))


def test_H_linear_of_one():
    # H_s^m 1 (t) = log(1/t)^m / m!
    for m in (1, 2, 3):
        got = apply_H_m(linear_profile(), m, ONE).values
        exact = _cell_avg(lambda t: np.log(1 / t) ** m / math.factorial(m), GRID)
        assert np.allclose(got, exact, rtol=1e-10)


def test_H_power_of_one_first_cell():
    # H_{s^a} 1 (t) = (1 - t^{1-a}) / (1 - a); average over (0, x0) by hand
    a = 0.5
    got = apply_H(power_profile(a), ONE).values
    x0 = GRID.edges[1]
    exact0 = (1 - x0 ** 0.5 / 1.5) / 0.5
    assert got[0] == pytest.approx(exact0, rel=1e-12)


def test_R_power_of_one():
    # R_{s^a} 1 (t) = t^{1-a}
    got = apply_R(power_profile(0.5), ONE).values
    e = GRID.edges
    exact = (2 / 3) * (e[1:] ** 1.5 - e[:-1] ** 1.5) / np.diff(e)
    assert np.allclose(got, exact, rtol=1e-10)


def test_R_linear_of_one_is_one():
    for m in (1, 2, 3):
        # R_s^m 1 (t) = (1/t) int_0^t log(t/s)^{m-1}/(m-1)! ds = 1
        assert np.allclose(apply_R_m(linear_profile(), m, ONE).values, 1.0, rtol=1e-10)


def test_indicator_closed_form_pointwise():
    phi = gauss_phi()
    f = GridFunction.indicator(GRID, 0.0, 0.5)
    t = np.array([1e-9, 1e-3, 0.1, 0.4])
    for m in (1, 2, 3):
        got = H_m_at(gauss_profile(), m, f, t)
        exact = [H_m_indicator_closed_form(phi, m, 0.5, x) for x in t]
        assert np.allclose(got, exact, rtol=1e-12)
    assert H_m_indicator_closed_form(phi, 2, 0.5, 0.7) == 0.0


def test_pointwise_against_quadrature():
    f = GridFunction.indicator(GRID, 0.1, 0.6)
    I = power_profile(0.75)
    t = 0.05
    ref, _ = integrate.quad(lambda s: float(I.J(t, s)) / float(I.I(s)), 0.1, 0.6, epsrel=1e-12)
    assert float(H_m_at(I, 2, f, np.array([t]))[0]) == pytest.approx(ref, rel=1e-9)
    t = 0.8
    ref, _ = integrate.quad(lambda s: float(I.J(s, t)), 0.1, 0.6, epsrel=1e-12)
    assert float(R_m_at(I, 2, f, np.array([t]))[0]) == pytest.approx(ref / float(I.I(t)), rel=1e-9)


def test_compose_matches_matrix():
    f = GridFunction.indicator(GRID, 0.0, 0.3)
    I = gauss_profile()
    a = compose_H(I, 2, f).to_grid().values
    b = apply_H_m(I, 2, f).values
    assert np.allclose(a, b, rtol=1e-9)


def test_G_dominates_R_and_decreases():
    I = power_profile(0.5)
    f = GridFunction.indicator(GRID, 0.0, 0.01)
    G, dec = apply_G_m(I, 2, f)
    R = apply_R_m(I, 2, rearrange(f))
    assert G.is_nonincreasing()
    assert np.all(G.values >= R.values * (1 - 1e-12))
    assert np.allclose(dec.reconstruct(), dec.g_values, rtol=1e-12)
    assert dec.intervals  # R of a narrow indicator rises then falls
    rows = G_rows(I, 2, f.values[None, :], G.grid)
    assert np.allclose(rows[0], G.values, rtol=1e-12)


def test_P_operator_positive():
    out = apply_P_phi(gauss_phi(), 2, GridFunction.indicator(GRID, 0.0, 0.5))
    assert np.all(out.values >= 0) and out.values[0] > out.values[-1]


def test_kernel_op_validation_and_identity():
    with pytest.raises(ParameterError):
        KernelOp("X", linear_profile())
    with pytest.raises(ParameterError):
        KernelOp("H", linear_profile(), m=-1)
    with pytest.raises(ParameterError):
        KernelOp("P", None)
    assert KernelOp("H", linear_profile(), m=0)(ONE) is ONE
    T = KernelOp("R", power_profile(0.5), 2)
    assert T.to_json() == {"op": "R", "profile": {"type": "power", "alpha": 0.5}, "m": 2}


vals = st.lists(st.floats(0, 100, allow_nan=False), min_size=SMALL.n_cells, max_size=SMALL.n_cells)


@settings(max_examples=25, deadline=None)
@given(vals, vals, st.sampled_from(PROFILES), st.integers(1, 3))
def test_associativity(u, v, I, m):
    f, g = GridFunction(SMALL, u), GridFunction(SMALL, v)
    left = pairing(apply_H_m(I, m, f), g)
    right = pairing(f, apply_R_m(I, m, g))
    assert left == pytest.approx(right, rel=1e-9, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(vals, st.sampled_from(PROFILES), st.integers(1, 3))
def test_H_output_nonincreasing_and_linear(u, I, m):
    f = GridFunction(SMALL, u)
    h = apply_H_m(I, m, f).values
    assert np.all(np.diff(h) <= 1e-12 * np.abs(h[:-1]) + 1e-300)
    h2 = apply_H_m(I, m, f.scale(2.0)).values
    assert np.allclose(h2, 2 * h, rtol=1e-12)


@settings(max_examples=20, deadline=None)
@given(vals, st.sampled_from(PROFILES))
def test_matrix_matches_apply(u, I):
    f = GridFunction(SMALL, u)
    M = operator_matrix("H", I, 2, SMALL)
    assert np.allclose(M @ f.values, apply_H_m(I, 2, f).values, rtol=1e-12, atol=1e-300)
