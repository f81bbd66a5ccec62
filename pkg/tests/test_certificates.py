import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from collapse_lab.certificates import (
    Profile,
    assemble_certificate,
    build_initial_datum,
    conservative_jl_constants,
    diffusion_bound,
    dyadic_search,
    fit_odi_constants,
    phi0_lower_bound,
    riccati_blow_up_time,
    theta_for,
)
from collapse_lab.grid import RadialField, build_grid
from collapse_lab.params import CoefficientFn, ModelParams
from collapse_lab.regions import Branch

from .oracles import riccati_time_by_ode


def test_riccati_examples():
    assert riccati_blow_up_time(1, 1, 3).blow_up_time == pytest.approx(math.log(2) / 2, rel=1e-14)
    assert riccati_blow_up_time(1, 1, 1).blow_up_time == math.inf
    w = riccati_blow_up_time(4, 1, 2)
    assert w.blow_up_time == pytest.approx(math.log(5 / 3) / 4, rel=1e-14)
    assert w.blow_up_time < w.bound_ln3 == pytest.approx(math.log(3) / 4)


@pytest.mark.parametrize("a,b,y0", [(0, 1, 1), (1, -1, 1), (1, 1, math.inf)])
def test_riccati_rejects_bad_input(a, b, y0):
    with pytest.raises(ValueError):
        riccati_blow_up_time(a, b, y0)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1.1, 50.0))
def test_riccati_closed_form_matches_ode(a, b, rho):
    y0 = rho * math.sqrt(b / a)
    w = riccati_blow_up_time(a, b, y0)
    ode = riccati_time_by_ode(a, b, y0)
    # the ODE stops at y = 1e8; the remaining time is about 1/(a 1e8)
    assert w.blow_up_time == pytest.approx(ode + 1 / (a * 1e8), rel=1e-3)
    if w.rho > 2:
        assert w.blow_up_time < w.bound_ln3


@pytest.mark.parametrize(
    "n,m,p,expected,branch",
    [(3, 1, 3, F(4, 3), Branch.LargeM), (5, 1, 5, F(8, 5), Branch.LargeM), (5, F(1, 10), 5, F(8, 5), Branch.SmallM)],
)
def test_theta_examples(n, m, p, expected, branch):
    th = theta_for(n, m, p, 0)
    assert th.theta == expected and th.branch is branch


def test_theta_rejects_inadmissible():
    with pytest.raises(ValueError):
        theta_for(3, 1, 3, F(1, 3))


def test_dyadic_search_example():
    j, s0, w = dyadic_search(1.0, 1.0, 1.0, 0.5, 4 / 3, 10.0, 1.0)
    # rho = s0^(-1/3) and the time bound ln3/2 s0^(2/3) < 10 always holds,
    # so the search stops where rho crosses 2, i.e. at s0 = 1/8 up to rounding
    assert j in (3, 4)
    assert w.rho == pytest.approx(s0 ** (-1 / 3), rel=1e-14)
    assert w.rho > 2 and (2 * s0) ** (-1 / 3) < 2
    assert w.bound_ln3 == pytest.approx(math.log(3) / 2 * s0 ** (2 / 3), rel=1e-14)


def jl_params(**kw):
    d = dict(n=3, R=1.0, m=1.0, kappa=0.2, mu_fn=CoefficientFn.constant(0.1), mu1=0.1, M0=8.0, M1=4.0)
    d.update(kw)
    return ModelParams(**d)


def test_r1_from_s0():
    c = assemble_certificate(jl_params(R=2.0), 3, 10.0, 5.0, C1=1.0, C2=1.0)
    assert c.feasible
    assert c.r1 == pytest.approx((c.s0 / 2) ** (1 / 3))
    assert (1 / 16) ** (1 / 3) == pytest.approx(2 ** (-4 / 3))


def test_feasibility_scales_like_power_of_s0():
    p = jl_params()
    c = assemble_certificate(p, 3, 10.0, 5.0, C1=0.3, C2=2.0)
    g, th = c.gamma, c.theta
    C3 = c.constants.C3

    def ratio(s0):
        a = 0.3 * s0 ** (g - 3)
        b = 2.0 * s0 ** (3 - g - th)
        return (C3 * s0 ** (2 - g)) ** 2 * a / b

    s1, s2 = 2.0**-5, 2.0**-9
    slope = math.log(ratio(s1) / ratio(s2)) / math.log(s1 / s2)
    assert slope == pytest.approx(th - 2, abs=1e-12)


def test_conservative_certificate_is_feasible():
    p = jl_params()
    c = assemble_certificate(p, 3, 100.0, 5.0)
    assert c.feasible and c.constants.source == "conservative"
    assert c.witness.rho > 2 and c.witness.bound_ln3 < 5.0
    assert set(c.to_dict()) >= {"gamma", "theta", "s0", "r1", "a", "b", "phi0", "blow_up_time_bound", "feasible"}


def test_pe_needs_supplied_constants():
    p = jl_params(kappa=0.1, variant="PE")
    with pytest.raises(ValueError):
        assemble_certificate(p, 6, 10.0, 5.0)
    assert assemble_certificate(p, 6, 10.0, 5.0, C1=0.1, C2=1.0).feasible


def test_gamma_outside_window_is_rejected():
    with pytest.raises(ValueError):
        assemble_certificate(jl_params(), 3, 10.0, 5.0, gamma="0.9", C1=1, C2=1)


def test_young_parameter_range():
    with pytest.raises(ValueError):
        conservative_jl_constants(jl_params(), 3.0, 10.0, 5.0, 0.5, 4 / 3, eta=1.0)


def test_diffusion_bound_branches():
    d = diffusion_bound(3, 1.0, 3.0, 10.0, 0.5)
    assert d.branch is Branch.LargeM and d.coef > 0
    d = diffusion_bound(5, 0.1, 5.0, 10.0, 0.5)
    assert d.branch is Branch.SmallM and d.coef == 0.0 and len(d.consts) == 2
    with pytest.raises(ValueError):
        diffusion_bound(3, 1.0, 3.0, 10.0, 0.1)


@pytest.mark.parametrize("profile", list(Profile))
@given(r1=st.floats(0.05, 0.6), L=st.floats(50.0, 500.0), M0=st.floats(0.5, 20.0))
def test_initial_datum_contract(profile, r1, L, M0):
    grid = build_grid(200, 1.0, 3, "graded", 0.97)
    params = jl_params(M0=M0, M1=M0 / 2)
    try:
        u = build_initial_datum(params, grid, r1, 3.0, L, profile)
    except ValueError as exc:
        assert "infeasible" in str(exc)
        assume(False)
    V = grid.volumes
    assert abs(np.dot(u.values, V) - M0) <= 1e-10 * M0
    assert np.all(np.diff(u.values) <= 1e-12 * u.sup)
    assert np.max(u.values * grid.centers**3) <= L * (1 + 1e-12)
    assert np.all(u.values[grid.faces[:-1] >= r1] == 0)


def test_plateau_cap_reports_achievable_mass():
    grid = build_grid(100, 1.0, 3)
    with pytest.raises(ValueError, match="maximal achievable mass"):
        build_initial_datum(jl_params(M0=100.0), grid, 0.2, 3.0, 10.0, "PlateauTail", a_max=1.0)


def test_phi0_bound_examples():
    g = build_grid(64, 1.0, 3)
    zero = phi0_lower_bound(RadialField(g, np.zeros(64)), 0.5, 0.5, M1=0.0)
    assert zero.lhs == 0 and zero.rhs == 0 and zero.precondition_ok
    # block of mass M0 on [0, r1] with r1^n = (1 - η) s0
    r1 = 0.5
    s0 = r1**3 / 0.5
    u = RadialField.from_function(g, lambda r: np.where(r < r1, 10.0, 0.0))
    c = phi0_lower_bound(u, s0, 0.5, 0.5, M1=1.0)
    assert c.precondition_ok and c.lhs / c.rhs >= 1


def test_fit_recovers_exact_riccati_data():
    # y = φ s0^... solves φ' = C1 s0^(γ-3) φ² - C2 s0^(3-γ-θ) exactly for a Riccati y
    s0, g, th, C1, C2 = 0.5, 0.5, 4 / 3, 0.7, 0.2
    a, b = C1 * s0 ** (g - 3), C2 * s0 ** (3 - g - th)
    k = math.sqrt(a * b)
    y_eq = math.sqrt(b / a)
    t = np.linspace(0, 0.2, 2001)
    # solution of y' = a y^2 - b from y0 = 2 y_eq
    A = (2 * y_eq - y_eq) / (2 * y_eq + y_eq)
    e = A * np.exp(2 * k * t)
    y = y_eq * (1 + e) / (1 - e)
    c1, c2 = fit_odi_constants(t, y, s0, g, th)
    assert c1 == pytest.approx(C1, rel=1e-3)
    assert c2 == pytest.approx(C2, rel=5e-2)
