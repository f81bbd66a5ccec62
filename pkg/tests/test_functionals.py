import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collapse_lab.functionals import (
    MomentConfig,
    beta_moment,
    c_aggregation,
    c_phi_psi,
    check_phi_psi_bound,
    check_w_psi_bound,
    decompose_I,
    phi,
    power_integral,
    product_integrate,
    psi,
    sample_moments,
)
from collapse_lab.grid import RadialField, build_grid, to_mass_function
from collapse_lab.params import CoefficientFn, ModelParams

from .oracles import beta_moment_mp, beta_mp


@pytest.mark.parametrize("a,b,s0,expected", [(0, 0, 2, 2.0), (-0.5, -0.5, 1, math.pi), (1, 1, 1, 1 / 6)])
def test_beta_moment_examples(a, b, s0, expected):
    assert beta_moment(a, b, s0) == pytest.approx(expected, rel=1e-14)


def test_beta_moment_domain():
    with pytest.raises(ValueError):
        beta_moment(-1.0, 0.0, 1.0)


@given(st.floats(-0.9, 3.0), st.floats(-0.9, 3.0), st.floats(0.01, 10.0))
def test_beta_moment_matches_mpmath(a, b, s0):
    assert beta_moment(a, b, s0) == pytest.approx(beta_moment_mp(a, b, s0), rel=1e-12)


@given(st.floats(-0.9, 3.0), st.floats(-0.9, 3.0), st.integers(1, 12))
def test_product_integration_of_constant_is_beta(a, b, cells):
    nodes = np.linspace(0.0, 1.5, cells + 1)
    val = product_integrate(nodes, np.ones_like(nodes), 1.5, a, b)
    assert val == pytest.approx(beta_mp(a + 1, b + 1) * 1.5 ** (a + b + 1), rel=1e-10)


@given(st.floats(-0.99, 4.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_power_integral_is_additive(e, x, y):
    lo, hi = sorted((x, y))
    mid = 0.5 * (lo + hi)
    whole = power_integral(lo, hi, e)
    parts = power_integral(lo, mid, e) + power_integral(mid, hi, e)
    assert whole == pytest.approx(parts, rel=1e-11, abs=1e-300)


def homogeneous(c=3.0, N=64, n=3, R=1.0):
    g = build_grid(N, R, n)
    return RadialField(g, np.full(N, c))


def test_phi_psi_for_linear_mass():
    # u ≡ n gives w(s) = s
    u = homogeneous(c=3.0)
    w = to_mass_function(u)
    cfg = MomentConfig(1.0, 0.5)
    assert phi(w, cfg) == pytest.approx(4 / 15, rel=1e-13)
    assert psi(w, cfg) == pytest.approx(4 / 15, rel=1e-13)
    assert check_phi_psi_bound(4 / 15, 4 / 15, cfg) > 0


def test_phi_with_s0_between_nodes_is_exact():
    u = homogeneous(c=3.0, N=10)
    cfg = MomentConfig(0.123456, 0.3)
    expected = beta_mp(2 - 0.3, 2) * 0.123456 ** (3 - 0.3)
    assert phi(to_mass_function(u), cfg) == pytest.approx(expected, rel=1e-12)


def test_zero_field():
    u = homogeneous(c=0.0)
    w = to_mass_function(u)
    cfg = MomentConfig(0.5, 0.5)
    params = ModelParams(3, 1.0, 1.0, 0.0, mu1=1.0)
    assert phi(w, cfg) == 0 and psi(w, cfg) == 0
    assert decompose_I(w, cfg, params, Mbar=0.0) == (0.0, 0.0, 0.0, 0.0)
    assert check_w_psi_bound(w, cfg) == 0.0
    assert check_phi_psi_bound(0.0, 0.0, cfg) == 0.0


def test_w_psi_margin_positive_for_linear_mass():
    w = to_mass_function(homogeneous(c=3.0, N=128))
    assert check_w_psi_bound(w, MomentConfig(1.0, 0.5)) > 0


def test_moment_config_domain():
    with pytest.raises(ValueError):
        MomentConfig(1.0, 1.0)
    with pytest.raises(ValueError):
        MomentConfig(0.0, 0.5)


def test_homogeneous_state_terms_cancel():
    params = ModelParams(3, 1.0, 1.0, 0.0, mu1=0.0)
    u = homogeneous(c=2.0, N=128)
    s = sample_moments(u, MomentConfig(0.5, 0.5), params)
    assert s.I4 == 0.0
    assert abs(s.I1) < 1e-12
    assert abs(s.I2 + s.I3) < 1e-12 * abs(s.I2)


def test_aggregation_bound_at_homogeneous_state():
    g = 0.5
    u = homogeneous(c=3.0, N=128)
    w = to_mass_function(u)
    cfg = MomentConfig(1.0, g)
    lhs = 3 * psi(w, cfg)
    rhs = c_aggregation(3, g) * phi(w, cfg) ** 2
    assert lhs - rhs >= 0


@given(
    st.lists(st.floats(0.0, 50.0), min_size=40, max_size=40),
    st.floats(0.05, 0.95),
    st.floats(0.01, 1.0),
    st.integers(3, 6),
)
def test_explicit_bounds_hold_for_arbitrary_profiles(vals, gamma, s0, n):
    g = build_grid(40, 1.0, n)
    u = RadialField(g, np.array(vals))
    w = to_mass_function(u)
    cfg = MomentConfig(s0, gamma)
    ph, ps = phi(w, cfg), psi(w, cfg)
    scale = max(ph, c_phi_psi(gamma) * s0 ** ((3 - gamma) / 2) * math.sqrt(ps), 1e-12)
    assert check_phi_psi_bound(ph, ps, cfg) >= -1e-8 * scale
    assert n * ps - c_aggregation(n, gamma) * s0 ** (gamma - 3) * ph**2 >= -1e-8 * max(n * ps, 1e-12)
    assert check_w_psi_bound(w, cfg) >= -1e-8 * max(float(w.w.max()), 1e-12)


def test_damping_term_sign_and_scaling():
    params = ModelParams(3, 1.0, 1.0, 0.5, mu_fn=CoefficientFn.constant(1.0), mu1=1.0)
    u = homogeneous(c=2.0, N=64)
    w = to_mass_function(u)
    cfg = MomentConfig(0.5, 0.5)
    I4 = decompose_I(w, cfg, params, Mbar=2.0)[3]
    assert I4 < 0
    I4_double = decompose_I(w, cfg, ModelParams(3, 1.0, 1.0, 0.5, mu1=2.0), Mbar=2.0)[3]
    assert I4_double == pytest.approx(2 * I4, rel=1e-14)
