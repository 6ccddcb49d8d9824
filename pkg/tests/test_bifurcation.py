import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from fracwave.bifurcation import (
    admissibility_boundary,
    bifurcation_point,
    bifurcation_point_fdp,
    bifurcation_points_fkdv,
    check_admissible,
    constant_solutions_fdp,
    fdp_kernel_condition,
    local_expansion_fdp,
    local_expansion_fkdv,
    mu_upper_bound_check_fdp,
)
from fracwave.errors import InadmissibleMode, NoRealConstants
from fracwave.kernel import bessel_symbol
from fracwave.solvers import FDP, FKDV, ProblemSpec, SolutionPoint, newton_solve, residual


def test_fkdv_bifurcation_values():
    pts = bifurcation_points_fkdv(2 * np.pi, 0.5, 3)
    assert [p.k for p in pts] == [1, 2, 3]
    assert_allclose(pts[0].mu_star, 2 ** -0.25, rtol=1e-15)
    assert_allclose(pts[0].mu_star, 0.8408964, atol=1e-7)
    assert all(p.constant_state == 0.0 for p in pts)
    assert pts[0].mu_star > pts[1].mu_star > pts[2].mu_star


def test_constant_states():
    gm, gp = constant_solutions_fdp(3.0, 1.0)
    assert_allclose([gm, gp], [(3 - math.sqrt(17)) / 4, (3 + math.sqrt(17)) / 4])
    with pytest.raises(NoRealConstants):
        constant_solutions_fdp(1.0, -1.0)


def test_admissibility_window():
    b = admissibility_boundary(0.5)
    assert_allclose(b, math.sqrt(80.0))
    with pytest.raises(InadmissibleMode) as e:
        check_admissible(2 * np.pi, 0.5, 1.0)
    assert_allclose(e.value.boundary, math.sqrt(80.0))
    check_admissible(0.5, 0.5, 1.0)
    check_admissible(2 * np.pi, 0.5, -0.1)
    with pytest.raises(InadmissibleMode):
        check_admissible(0.5, 0.5, -0.1)
    with pytest.raises(InadmissibleMode):
        check_admissible(0.5, 0.5, 0.0)


def test_fdp_bifurcation_point_value():
    bp = bifurcation_point_fdp(0.5, 0.5, 1.0)
    assert_allclose(bp.mu_star, 4.68541962233676, rtol=1e-13)
    assert_allclose(bp.constant_state, constant_solutions_fdp(bp.mu_star, 1.0)[1])
    assert abs(fdp_kernel_condition(bp.mu_star, bessel_symbol(4 * np.pi, 0.5), 1.0)) < 1e-12
    assert bp.mu_star > 1.0


def test_fdp_negative_kappa_bifurcation():
    bp = bifurcation_point_fdp(2 * np.pi, 0.5, -0.1)
    lam = bessel_symbol(1.0, 0.5)
    assert abs(fdp_kernel_condition(bp.mu_star, lam, -0.1)) < 1e-12
    assert bp.mu_star > math.sqrt(0.8)


@settings(max_examples=40, deadline=None)
@given(s=st.floats(0.2, 0.9), kappa=st.floats(0.05, 5.0), frac=st.floats(0.05, 0.95))
def test_fdp_root_solves_kernel_condition(s, kappa, frac):
    # any period inside the kappa > 0 window
    P = frac * 2 * math.pi / admissibility_boundary(s)
    bp = bifurcation_point_fdp(P, s, kappa)
    lam = bessel_symbol(2 * math.pi / P, s)
    assert abs(fdp_kernel_condition(bp.mu_star, lam, kappa)) < 1e-12
    assert bp.mu_star > math.sqrt(kappa)
    # gamma_+ lies in (mu/4, mu/2) for kappa > 0, so the ratio is in (1, 3) / 3
    assert 0 < lam < 1 / 3


def _residual_slope(spec, ex):
    ts = np.array([1e-2, 3e-3, 1e-3])
    grid = spec.grid(64)
    res = []
    for t in ts:
        phi, mu = ex.seed(t, grid)
        res.append(np.max(np.abs(residual(spec, phi, mu).values)))
    return np.polyfit(np.log(ts), np.log(res), 1)[0]


def test_fkdv_expansion_is_second_order():
    spec = ProblemSpec(FKDV, 0.5, 2 * np.pi)
    ex = local_expansion_fkdv(2 * np.pi, 0.5)
    assert_allclose(ex.mu0, 2 ** -0.25)
    assert_allclose(ex.mu2, -0.8452181988225476, rtol=1e-12)
    assert abs(_residual_slope(spec, ex) - 3.0) < 0.2


def test_fdp_expansion_is_second_order():
    spec = ProblemSpec(FDP, 0.5, 0.5, 1.0)
    ex = local_expansion_fdp(0.5, 0.5, 1.0)
    assert_allclose([ex.mu2, ex.phi2_mean, ex.phi2_cos2],
                    [1.7443686948469725, 0.6267161073128394, 0.637533745467868], rtol=1e-10)
    assert abs(_residual_slope(spec, ex) - 3.0) < 0.2


def test_expansion_seed_matches_cosine_seed():
    ex = local_expansion_fdp(0.5, 0.5, 1.0, N=32)
    phi, mu = ex.seed(0.05)
    c, mu2 = ex.cosine_seed(0.05, 17)
    assert mu == mu2
    assert_allclose(phi.cosine_coefficients(), c, atol=1e-14)


def test_mu_bound_terms():
    spec = ProblemSpec(FDP, 0.5, 0.5, 1.0)
    ex = local_expansion_fdp(0.5, 0.5, 1.0)
    phi, mu = ex.seed(0.1, spec.grid(64))
    pt = newton_solve(spec, phi, mu)
    rep = mu_upper_bound_check_fdp(pt, 1.0, 0.5, 0.5)
    assert rep["contraction factor"].status == "pass"
    assert rep["contraction factor"].value >= 1.0
    const = SolutionPoint(spec.grid(64).field(np.full(64, ex.phi0)), ex.mu0, 0.0)
    assert mu_upper_bound_check_fdp(const, 1.0, 0.5, 0.5)["contraction factor"].status == "skip"


def test_dispatch():
    assert bifurcation_point(ProblemSpec(FKDV, 0.5, 1.0)).mu_star == bifurcation_points_fkdv(1.0, 0.5, 1)[0].mu_star
    assert bifurcation_point(ProblemSpec(FDP, 0.5, 0.5, 1.0)).k == 1
