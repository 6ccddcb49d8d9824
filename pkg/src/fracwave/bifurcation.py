"""Bifurcation points off constant states and second-order local expansions.

fKdV bifurcates from phi = 0 at mu*_k = <2 pi k / P>^{-s}. fDP bifurcates from
the constant gamma_+(mu) where <2 pi k / P>^{-s} = (mu - gamma_+)/(3 gamma_+),
which has a root only on one side of 2 pi k / P = sqrt(3^{2/s} - 1),
depending on the sign of kappa.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import InadmissibleMode, InvalidParameter, NoRealConstants, NoRoot
from .kernel import bessel_symbol, check_s, dp_symbol
from .report import Check, DiagnosticsReport
from .solvers import FDP, FKDV, ProblemSpec
from .spectral import PeriodicGrid


@dataclass(frozen=True)
class BifurcationPoint:
    mu_star: float
    k: int
    constant_state: float


@dataclass(frozen=True)
class LocalExpansion:
    """phi(t) = phi0 + t cos(2 pi x / P) + t^2 phi2(x),  mu(t) = mu0 + t^2 mu2.

    phi2 = phi2_mean + phi2_cos2 cos(4 pi x / P). ``phi1``/``phi2`` are the
    sampled fields on ``grid``.
    """

    phi0: float
    mu0: float
    mu2: float
    phi2_mean: float
    phi2_cos2: float
    grid: PeriodicGrid

    @property
    def phi1(self):
        return self.grid.sample(lambda x: np.cos(2 * np.pi * x / self.grid.P))

    @property
    def phi2(self):
        P = self.grid.P
        return self.grid.sample(lambda x: self.phi2_mean + self.phi2_cos2 * np.cos(4 * np.pi * x / P))

    def cosine_seed(self, t, n_modes):
        """Cosine coefficients and wave speed of the truncated expansion at amplitude t."""
        c = np.zeros(n_modes)
        c[0] = self.phi0 + t * t * self.phi2_mean
        c[1] = t
        c[2] = t * t * self.phi2_cos2
        return c, self.mu0 + t * t * self.mu2

    def seed(self, t, grid=None):
        """(phi, mu) of the truncated expansion as a field on ``grid``."""
        grid = grid or self.grid
        P = grid.P
        phi = grid.sample(lambda x: self.phi0 + t * np.cos(2 * np.pi * x / P)
                          + t * t * (self.phi2_mean + self.phi2_cos2 * np.cos(4 * np.pi * x / P)))
        return phi, self.mu0 + t * t * self.mu2


def gamma_pm(mu, kappa):
    disc = mu * mu + 8.0 * kappa
    if 0 > disc >= -8 * np.finfo(float).eps * mu * mu:
        disc = 0.0  # roundoff at the double root mu^2 = -8 kappa
    if disc < 0:
        raise NoRealConstants(f"no real constant solutions for kappa < -mu^2/8 (mu={mu}, kappa={kappa})")
    r = math.sqrt(disc)
    return 0.25 * (mu - r), 0.25 * (mu + r)


def constant_solutions_fdp(mu, kappa):
    """(gamma_-, gamma_+) = (mu -+ sqrt(mu^2 + 8 kappa)) / 4."""
    return gamma_pm(float(mu), float(kappa))


def bifurcation_points_fkdv(P, s, k_max):
    s = check_s(s)
    if not (math.isfinite(P) and P > 0):
        raise InvalidParameter("period P must be positive and finite")
    k = np.arange(1, int(k_max) + 1)
    mus = bessel_symbol(2 * np.pi * k / P, s)
    return [BifurcationPoint(float(m), int(kk), 0.0) for kk, m in zip(k, np.atleast_1d(mus))]


def admissibility_boundary(s):
    """sqrt(3^{2/s} - 1): the frequency where <xi>^{-s} = 1/3."""
    s = check_s(s)
    return math.sqrt(3.0 ** (2.0 / s) - 1.0)


def check_admissible(P, s, kappa, k=1):
    """Raise InadmissibleMode unless mode k can bifurcate for this sign of kappa."""
    bound = admissibility_boundary(s)
    xi = 2 * math.pi * k / P
    if kappa == 0:
        raise InadmissibleMode("kappa = 0 admits bifurcation only at the single frequency "
                               f"{bound:.6g}; rejected", boundary=bound)
    if kappa > 0 and not xi > bound:
        raise InadmissibleMode(f"kappa > 0 needs 2 pi k / P > {bound:.6g}, got {xi:.6g}", boundary=bound)
    if kappa < 0 and not xi < bound:
        raise InadmissibleMode(f"kappa < 0 needs 2 pi k / P < {bound:.6g}, got {xi:.6g}", boundary=bound)
    return bound


def fdp_kernel_condition(mu, lam, kappa):
    """(mu - gamma_+)/(3 gamma_+) - lam: zero at an fDP bifurcation point."""
    gp = gamma_pm(mu, kappa)[1]
    return (mu - gp) / (3.0 * gp) - lam


def bifurcation_point_fdp(P, s, kappa, k=1):
    s = check_s(s)
    kappa = float(kappa)
    check_admissible(P, s, kappa, k)
    lam = bessel_symbol(2 * math.pi * k / P, s)
    lo = math.sqrt(kappa) if kappa > 0 else math.sqrt(-8.0 * kappa)
    f = lambda mu: fdp_kernel_condition(mu, lam, kappa)
    hi = 2.0 * lo
    while f(hi) * f(lo) > 0:
        hi *= 2.0
        if hi > 1e15 * lo:
            raise NoRoot("could not bracket the fDP bifurcation condition")
    mu = brentq(f, lo, hi, xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps, maxiter=500)
    return BifurcationPoint(float(mu), int(k), gamma_pm(mu, kappa)[1])


def local_expansion_fkdv(P, s, N=64):
    """Second-order expansion of the fKdV branch from (0, mu*_{P,1})."""
    s = check_s(s)
    l1 = bessel_symbol(2 * math.pi / P, s)
    l2 = bessel_symbol(4 * math.pi / P, s)
    a0 = -1.0 / (4.0 * (1.0 - l1))
    a2 = 1.0 / (4.0 * (l1 - l2))
    mu2 = 1.0 / (4.0 * (l1 - 1.0)) + 1.0 / (8.0 * (l1 - l2))
    return LocalExpansion(0.0, l1, mu2, a0, a2, PeriodicGrid(P, N))


def local_expansion_fdp(P, s, kappa, N=64):
    """Second-order expansion of the fDP branch from (gamma_+(mu*), mu*).

    The constant state moves with mu, so the mean part of phi2 carries
    gamma_+'(mu*) mu2 besides the forced response to phi1^2.
    """
    s = check_s(s)
    bp = bifurcation_point_fdp(P, s, kappa, 1)
    mu0, g0 = bp.mu_star, bp.constant_state
    l1 = bessel_symbol(2 * math.pi / P, s)
    l2 = bessel_symbol(4 * math.pi / P, s)
    dg = g0 / (4.0 * g0 - mu0)  # d gamma_+ / d mu
    b0 = 1.0 / (3.0 * g0 * (l1 - 1.0))
    b2 = (1.0 + 3.0 * l2) / (12.0 * g0 * (l1 - l2))
    mu2 = (1.0 + 3.0 * l1) * (b0 + 0.5 * b2) / (1.0 - dg * (1.0 + 3.0 * l1))
    return LocalExpansion(g0, mu0, mu2, b0 + dg * mu2, b2, PeriodicGrid(P, N))


def bifurcation_point(spec, k=1):
    if spec.kind == FKDV:
        return bifurcation_points_fkdv(spec.P, spec.s, k)[k - 1]
    return bifurcation_point_fdp(spec.P, spec.s, spec.kappa, k)


def local_expansion(spec, N=64):
    if spec.kind == FKDV:
        return local_expansion_fkdv(spec.P, spec.s, N)
    return local_expansion_fdp(spec.P, spec.s, spec.kappa, N)


def mu_upper_bound_check_fdp(point, kappa, s, P, nonconstant=None):
    """Evaluate the contraction factor max(phi)/mu + (3/4) m(2 pi / P).

    For a nonconstant smooth solution the factor cannot be below 1 (otherwise
    the derivative would vanish), so a factor < 1 at a nonconstant point is a
    failure. Also reports the terms 1/2 + kappa/mu^2 and (3/4) m(2 pi / P) of
    the large-speed estimate and whether their sum stays below 1.
    """
    mu = point.mu
    m1 = dp_symbol(2 * math.pi / P, s)
    factor = point.max_phi / mu + 0.75 * m1
    if nonconstant is None:
        v = point.phi.values
        nonconstant = np.ptp(v) > 1e-10 * max(1.0, np.max(np.abs(v)))
    N = point.grid.N
    rep = DiagnosticsReport("fDP wave-speed bound terms")
    rep.add(Check(
        name="contraction factor",
        status=("pass" if factor >= 1.0 else "fail") if nonconstant else "skip",
        value=float(factor),
        threshold=1.0,
        anchor="nonconstant solutions need max(phi)/mu + (3/4) m(2 pi/P) >= 1",
        detail="constant point: factor reported only" if not nonconstant else "",
        N=N,
    ))
    head = 0.5 + kappa / mu**2
    slack = 1.0 - head - 0.75 * m1
    rep.add(Check(
        name="large-speed inequality",
        status="pass" if slack > 0 else "skip",
        value=float(slack),
        threshold=0.0,
        anchor="1/2 + kappa/mu^2 + (3/4) m(2 pi/P) < 1 leaves room for the period-dependent term",
        detail=f"1/2 + kappa/mu^2 = {head:.6g}, (3/4) m(2 pi/P) = {0.75 * m1:.6g}",
        N=N,
    ))
    return rep
