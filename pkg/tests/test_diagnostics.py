import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from fracwave.bifurcation import local_expansion
from fracwave.diagnostics import (
    check_bounds,
    check_exponent,
    check_nodal,
    check_regularity_lower_bound,
    check_residual_forms,
    estimate_holder_exponent,
    run_diagnostics,
)
from fracwave.errors import WindowTooSmall
from fracwave.solvers import FDP, FKDV, ProblemSpec, SolutionPoint, newton_solve
from fracwave.spectral import PeriodicGrid

KDV = ProblemSpec(FKDV, 0.5, 2 * np.pi)
DP = ProblemSpec(FDP, 0.5, 0.5, 1.0)


def cusp_point(alpha, mu=1.0, gap=0.0, N=256, P=2 * np.pi, c=0.3):
    g = PeriodicGrid(P, N)
    phi = g.sample(lambda x: mu - gap - c * np.abs(x) ** alpha)
    return SolutionPoint(phi, mu, 0.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 1.9), st.floats(0.05, 2.0))
def test_exponent_of_pure_power_law(alpha, c):
    fit = estimate_holder_exponent(cusp_point(alpha, c=c))
    assert_allclose(fit.alpha_hat, alpha, atol=1e-10)
    assert_allclose(fit.c_hat, c, rtol=1e-8)
    assert fit.r_squared > 1 - 1e-12
    assert_allclose(fit.alpha_speed, alpha, atol=1e-10)


def test_default_window_and_point_count():
    fit = estimate_holder_exponent(cusp_point(0.5, N=256))
    P = 2 * np.pi
    assert_allclose(fit.fit_window, (4 * P / 256, P / 16))
    assert fit.n_points == 13


def test_smooth_crest_gives_two():
    g = PeriodicGrid(2 * np.pi, 256)
    pt = SolutionPoint(g.sample(lambda x: 0.1 * np.cos(x)), 1.0, 0.0)
    fit = estimate_holder_exponent(pt)
    assert abs(fit.alpha_hat - 2) < 0.05
    # mu - phi has a large offset at a smooth crest and does not see the x^2 law
    assert fit.alpha_speed < 0.5


def test_window_too_small():
    with pytest.raises(WindowTooSmall):
        estimate_holder_exponent(cusp_point(0.5, N=32))
    with pytest.raises(WindowTooSmall):
        estimate_holder_exponent(cusp_point(0.5, N=256), window=(0.01, 0.5))


def test_exponent_checks_are_mutually_exclusive():
    cusp = check_exponent(cusp_point(0.5, gap=1e-3), KDV)
    assert [c.name for c in cusp.checks] == ["cusp exponent"] and cusp.passed
    wrong = check_exponent(cusp_point(0.8, gap=1e-3), KDV)
    assert not wrong.passed
    g = PeriodicGrid(2 * np.pi, 256)
    smooth = SolutionPoint(g.sample(lambda x: 0.05 * np.cos(x)), 0.84, 0.0)
    rep = check_exponent(smooth, KDV)
    assert [c.name for c in rep.checks] == ["smooth exponent"] and rep.passed
    middle = SolutionPoint(g.sample(lambda x: 0.4 * np.cos(x)), 0.84, 0.0)
    assert [c.status for c in check_exponent(middle, KDV).checks] == ["skip"]


def test_nodal_checks_catch_bad_profiles():
    g = PeriodicGrid(2 * np.pi, 64)
    odd = SolutionPoint(g.sample(lambda x: np.cos(x) + 0.1 * np.sin(x)), 2.0, 0.0)
    assert check_nodal(odd)["even"].status == "fail"
    wavy = SolutionPoint(g.sample(lambda x: np.cos(x) + 0.5 * np.cos(3 * x)), 2.0, 0.0)
    assert check_nodal(wavy)["increasing on (-P/2, 0)"].status == "fail"
    above = SolutionPoint(g.sample(np.cos), 0.9, 0.0)
    assert check_nodal(above)["below wave speed"].status == "fail"
    const = SolutionPoint(g.field(np.full(64, 0.3)), 1.0, 0.0)
    assert check_nodal(const).passed


def test_bounds_on_violating_profile():
    g = PeriodicGrid(2 * np.pi, 64)
    # phi > 0 everywhere violates min phi <= 0 and the L2 identity
    pt = SolutionPoint(g.sample(lambda x: 0.5 + 0.1 * np.cos(x)), 0.8, 0.0)
    rep = check_bounds(pt, KDV)
    assert rep["min phi <= 0"].status == "fail"
    assert rep["L2 identity"].status == "fail"


def test_trough_gap_check():
    assert check_regularity_lower_bound(cusp_point(0.5)).passed
    g = PeriodicGrid(2 * np.pi, 64)
    flat = SolutionPoint(g.field(np.full(64, 1.0)), 1.0, 0.0)
    assert not check_regularity_lower_bound(flat).passed


@pytest.mark.parametrize("spec", [KDV, DP], ids=["fkdv", "fdp"])
def test_full_battery_on_small_amplitude_solution(spec):
    ex = local_expansion(spec)
    phi, mu = ex.seed(0.05, spec.grid(256))
    pt = newton_solve(spec, phi, mu)
    rep = run_diagnostics(pt, spec)
    assert rep.passed, rep.summary()
    assert rep["smooth exponent"].status == "pass"
    names = {c.name for c in rep.checks}
    if spec.kind == FDP:
        assert {"residual forms agree", "contraction factor", "large-speed inequality"} <= names
        assert check_residual_forms(pt, spec).passed
    else:
        assert "L2 identity" in names
    d = rep.to_dict()
    assert d["passed"] and len(d["checks"]) == len(rep.checks)
    assert "PASS" in rep.summary()
