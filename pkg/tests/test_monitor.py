import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from collapse_lab import monitor as mon
from collapse_lab.certificates import build_initial_datum
from collapse_lab.functionals import MomentConfig
from collapse_lab.grid import RadialField, build_grid, mass
from collapse_lab.params import CoefficientFn, ModelParams
from collapse_lab.solver import MomentSeries, run


def params(**kw):
    d = dict(n=3, R=1.0, m=1.0, kappa=0.0, mu1=1.0, M0=1.0, M1=0.5)
    d.update(kw)
    return ModelParams(**d)


def test_pointwise_bound_value():
    assert mon.pointwise_jl_bound(params(), 0.0, 0.5) == pytest.approx(6 / math.pi, rel=1e-14)


def test_pointwise_bound_is_tight_at_boundary_for_homogeneous_state():
    g = build_grid(64, 1.0, 3)
    u = RadialField(g, np.full(64, 2.0))
    M0 = mass(u)
    assert mon.pointwise_jl_bound(params(), 0.0, 1.0, M0) == pytest.approx(2.0, rel=1e-13)
    e = mon.check_pointwise_jl(u, params(), M0=M0)
    assert e.passed and e.margin >= 0
    assert e.note == "cell 63"


def test_hypotheses_gate_the_pointwise_check():
    g = build_grid(16, 1.0, 3)
    rising = RadialField.from_function(g, lambda r: r)
    ok, why = mon.hypotheses_jl(params(), rising)
    assert not ok and "nonincreasing" in why
    e = mon.check_pointwise_jl(rising, params(), applicable=ok, note=why)
    assert not e.applicable and e.passed
    ok, why = mon.hypotheses_jl(params(lambda_fn=CoefficientFn.power(1.0, 1.0)), RadialField(g, np.ones(16)))
    assert not ok and "λ" in why


def test_mass_growth_entries():
    s = MomentSeries()
    for t, M in [(0.0, 1.0), (0.5, 1.2), (1.0, 1.5)]:
        s.append((t, 0.0, 1.0, M, M) + (math.nan,) * 6 + (0.0,))
    led = mon.check_mass_growth(s, params(lambda_fn=CoefficientFn.constant(0.5)))
    assert [e.passed for e in led] == [True, True, True]
    assert led[2].rhs == pytest.approx(math.exp(0.5))
    led = mon.check_mass_growth(s, params())
    assert [e.passed for e in led] == [True, False, False]


def test_monotone_check():
    g = build_grid(16, 1.0, 3)
    assert mon.check_monotone(RadialField(g, np.ones(16))).margin == 0.0
    e = mon.check_monotone(RadialField.from_function(g, lambda r: 1 + r))
    assert not e.passed


def test_pe_pointwise_check():
    g = build_grid(32, 1.0, 3)
    e = mon.check_pointwise_pe(RadialField(g, np.zeros(32)), 2.0, 6.0)
    assert e.passed and e.margin > 0
    u = build_initial_datum(params(M0=2.0), g, 0.5, 6.0, 50.0)
    assert mon.envelope_constant(u, 6.0, faces=False) <= 50.0 * (1 + 1e-12)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
def test_three_point_derivative_exact_on_quadratics(a, b, c, h1, h2):
    f = lambda x: a + b * x + c * x * x
    d = mon.central_derivative([f(-h1), f(0.0), f(h2)], h1, h2)
    assert d == pytest.approx(b, abs=1e-9 * (1 + abs(a) + abs(b) + abs(c)) / min(h1, h2))


def test_odi_needs_three_samples():
    s = MomentSeries()
    s.append((0.0,) * 12)
    (e,) = mon.check_odi(s, MomentConfig(0.5, 0.5), params())
    assert not e.applicable


def steady_run():
    g = build_grid(64, 1.0, 3)
    u0 = RadialField(g, np.full(64, 2.0))
    p = params(M0=mass(u0), mu1=0.0)
    return p, run(p, u0, 0.01, moments=MomentConfig(0.5, 0.5), output_every=0.002)


def test_homogeneous_state_ledger():
    p, res = steady_run()
    cfg = MomentConfig(res.diagnostics["s0_effective"], 0.5)
    led = mon.check_odi(res.series, cfg, p)
    odi = [e for e in led if e.check_id == "odi"]
    assert odi and all(abs(e.margin) <= 1e-8 * max(abs(e.lhs), abs(e.rhs), 1.0) for e in odi)
    led += mon.check_lemma_bounds(res.series, cfg, p, snapshots=res.snapshots)
    assert led.all_pass
    assert {e.check_id for e in led} >= {"odi", "signal_I3", "phi_psi", "aggregation_I2", "damping_I4", "diffusion_I1", "w_psi"}


def test_pe_signal_term_is_shape_only():
    g = build_grid(32, 1.0, 3)
    p = params(variant="PE")
    res = run(p, RadialField(g, np.full(32, 1.0)), 0.004, moments=MomentConfig(0.5, 0.5), output_every=0.002)
    led = mon.check_odi(res.series, MomentConfig(res.diagnostics["s0_effective"], 0.5), p)
    sig = [e for e in led if e.check_id == "signal_I3"]
    assert sig and not any(e.applicable for e in sig)
    assert "shape-only" in sig[0].note


def test_ledger_csv_layout():
    led = mon.Ledger([mon.entry(0.0, "x", 1.0, 2.0, 1.0, 1e-8, note="a,b"), mon.not_applicable(0.0, "y", "skip")])
    lines = led.to_csv().splitlines()
    assert lines[0] == "t,check_id,lhs,rhs,margin,pass,applicable,note"
    assert lines[1].endswith(",1,1,a;b")
    assert led.all_pass
    assert led.summary()["y"]["applicable"] == 0


def test_logistic_closed_form():
    t = np.linspace(0, 5, 11)
    u = mon.logistic_solution(2.0, 1.0, 1.0, 1.0, t)
    np.testing.assert_allclose(u, 2 * np.exp(t) / (2 * np.exp(t) - 1), rtol=1e-14)
    with pytest.raises(ValueError):
        mon.logistic_solution(2.0, 0.0, 1.0, 1.0, t)
