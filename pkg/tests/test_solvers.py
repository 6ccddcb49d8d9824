import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from fracwave.bifurcation import gamma_pm, local_expansion
from fracwave.errors import InvalidParameter, NegativeRadicand, NoConvergence
from fracwave.kernel import bessel_symbol
from fracwave.solvers import (
    FDP,
    FKDV,
    Discretization,
    NewtonOptions,
    ProblemSpec,
    bootstrap_iterate,
    jacobian_fdp,
    jacobian_fkdv,
    newton_solve,
    resample,
    residual,
    residual_fdp,
    residual_fdp_linearized,
    residual_fkdv,
)
from fracwave.spectral import PeriodicGrid, cosine_coefficients, from_cosine

KDV = ProblemSpec(FKDV, 0.5, 2 * np.pi)
DP = ProblemSpec(FDP, 0.5, 0.5, 1.0)


def test_problem_spec_validation():
    with pytest.raises(InvalidParameter):
        ProblemSpec("kdv", 0.5, 1.0)
    with pytest.raises(InvalidParameter):
        ProblemSpec(FKDV, 0.5, 1.0, kappa=1.0)
    with pytest.raises(InvalidParameter):
        ProblemSpec(FDP, 0.5, -1.0, 1.0)
    assert ProblemSpec("FDP", 0.5, 1.0, 2.0).kind == FDP


def test_constant_states_solve_the_equations():
    g = PeriodicGrid(1.0, 16)
    zero = g.field(np.zeros(16))
    assert np.max(np.abs(residual_fkdv(zero, 0.7, 0.5).values)) == 0
    # constant c solves fKdV when mu c = c^2/2 + c, i.e. c = 2(mu - 1)
    c = g.field(np.full(16, 2 * (0.7 - 1)))
    assert_allclose(residual_fkdv(c, 0.7, 0.5).values, 0, atol=1e-15)
    for gam in gamma_pm(3.0, 1.0):
        f = g.field(np.full(16, gam))
        assert_allclose(residual_fdp(f, 3.0, 1.0, 0.5).values, 0, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=5, max_size=5), st.floats(1.0, 5.0), st.floats(-1, 1))
def test_linearized_residual_relation(c, mu, kappa):
    # L-form residual is -(1 + 3 Lambda^{-s})^{-1} applied to the Lambda-form residual
    g = PeriodicGrid(1.0, 16)
    coef = np.zeros(9)
    coef[:5] = c
    phi = from_cosine(coef, g)
    r1 = residual_fdp(phi, mu, kappa, 0.5)
    r2 = residual_fdp_linearized(phi, mu, kappa, 0.5)
    lam = bessel_symbol(g.frequencies, 0.5)
    assert_allclose(cosine_coefficients(r2), -cosine_coefficients(r1) / (1 + 3 * lam), atol=1e-13)


def _fd_orders(spec, seed):
    rng = np.random.default_rng(seed)
    d = Discretization(spec, 32)
    c = rng.standard_normal(d.n) / (1 + np.arange(d.n)) ** 2
    v = rng.standard_normal(d.n) / (1 + np.arange(d.n))
    mu = 1.3 if spec.kind == FKDV else 4.0
    J = d.jacobian(c, mu)
    r0 = d.residual(c, mu)
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        errs.append(np.max(np.abs(d.residual(c + h * v, mu) - r0 - h * (J @ v))))
    return np.log2(np.array(errs[:-1]) / np.array(errs[1:]))


@pytest.mark.parametrize("spec", [KDV, DP], ids=["fkdv", "fdp"])
@pytest.mark.parametrize("seed", range(3))
def test_jacobian_finite_difference_order(spec, seed):
    assert_allclose(_fd_orders(spec, seed), 2.0, atol=0.05)


def test_field_jacobian_wrappers_match_discretization():
    g = PeriodicGrid(1.0, 16)
    phi = g.sample(lambda x: 0.3 * np.cos(2 * np.pi * x))
    c = cosine_coefficients(phi)
    assert_allclose(jacobian_fkdv(phi, 0.9, 0.5), Discretization(ProblemSpec(FKDV, 0.5, 1.0), 16).jacobian(c, 0.9))
    assert_allclose(jacobian_fdp(phi, 5.0, 2.0, 0.5),
                    Discretization(ProblemSpec(FDP, 0.5, 1.0, 2.0), 16).jacobian(c, 5.0))


def test_dmu_is_the_field():
    d = Discretization(KDV, 16)
    c = np.linspace(1, 0, d.n)
    assert_allclose(d.residual(c, 1.5) - d.residual(c, 1.0), 0.5 * d.dmu(c), atol=1e-15)


def test_resample_is_exact_for_resolved_fields():
    g1, g2 = PeriodicGrid(2.0, 16), PeriodicGrid(2.0, 64)
    f = lambda x: np.cos(np.pi * x) + 0.2 * np.cos(3 * np.pi * x)
    assert_allclose(resample(g1.sample(f), g2).values, g2.sample(f).values, atol=1e-14)
    assert_allclose(resample(g2.sample(f), g1).values, g1.sample(f).values, atol=1e-14)


@pytest.mark.parametrize("spec", [KDV, DP], ids=["fkdv", "fdp"])
def test_newton_converges_from_local_expansion(spec):
    ex = local_expansion(spec)
    t = 0.1
    phi, mu = ex.seed(t, spec.grid(64))
    pt = newton_solve(spec, phi, mu)
    assert pt.residual_norm < 1e-11 * max(1, mu)
    assert pt.phi.is_even(1e-12)
    assert pt.iterations <= 6
    # the seed is second-order accurate, so the correction is O(t^3)
    assert np.max(np.abs(pt.phi.values - phi.values)) < 10 * t**3
    assert np.max(np.abs(residual(spec, pt.phi, mu).values)) < 1e-11 * max(1, mu)


def test_newton_reports_failure():
    phi = PeriodicGrid(2 * np.pi, 32).sample(lambda x: 3 * np.cos(x))
    with pytest.raises(NoConvergence):
        newton_solve(KDV, phi, 0.8, NewtonOptions(max_iter=2))


def test_bootstrap_reaches_newton_solution():
    ex = local_expansion(KDV)
    phi, mu = ex.seed(0.2, KDV.grid(64))
    ref = newton_solve(KDV, phi, mu)
    out = bootstrap_iterate(KDV, phi, mu, tol=1e-12)
    assert_allclose(out.phi.values, ref.phi.values, atol=1e-10)
    assert out.residual_norm < 1e-10


@pytest.mark.parametrize("spec", [KDV, DP], ids=["fkdv", "fdp"])
def test_solutions_are_bootstrap_fixed_points(spec):
    ex = local_expansion(spec)
    phi, mu = ex.seed(0.1, spec.grid(64))
    ref = newton_solve(spec, phi, mu)
    out = bootstrap_iterate(spec, ref.phi, mu, tol=1e-12)
    assert out.iterations <= 3
    assert_allclose(out.phi.values, ref.phi.values, atol=1e-12)


def test_bootstrap_negative_radicand():
    phi = PeriodicGrid(2 * np.pi, 32).sample(lambda x: 5 + np.cos(x))
    with pytest.raises(NegativeRadicand):
        bootstrap_iterate(KDV, phi, 0.5)


def test_dealiased_discretization_solves_too():
    ex = local_expansion(KDV)
    phi, mu = ex.seed(0.1, KDV.grid(64))
    pt = newton_solve(KDV, phi, mu, NewtonOptions(dealias=True))
    assert pt.residual_norm < 1e-11
    plain = newton_solve(KDV, phi, mu)
    assert_allclose(pt.phi.values, plain.phi.values, atol=1e-12)
