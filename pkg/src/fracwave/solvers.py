"""Steady fKdV and fDP equations: residuals, Jacobians, Newton and bootstrap solvers.

fKdV:  F(phi, mu) = mu phi - phi^2/2 - Lambda^{-s} phi
fDP:   G(phi, mu) = mu phi - phi^2/2 - (3/2) Lambda^{-s}(phi^2) + kappa

Here Lambda^{-s} is the Fourier multiplier with symbol (1 + xi^2)^{-s/2}.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import dgecon

from .errors import InvalidParameter, NegativeRadicand, NoConvergence, SingularJacobian
from .kernel import bessel_symbol, check_s
from .spectral import (
    CosineBasis,
    MultiplierSpec,
    PeriodicField,
    PeriodicGrid,
    apply_multiplier,
    cosine_coefficients,
    dealiased_product,
    from_cosine,
)

FKDV = "fkdv"
FDP = "fdp"


@dataclass(frozen=True)
class ProblemSpec:
    kind: str
    s: float
    P: float
    kappa: float = 0.0

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in (FKDV, FDP):
            raise InvalidParameter(f"unknown equation {self.kind!r}; use 'fkdv' or 'fdp'")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "s", check_s(self.s))
        P = float(self.P)
        if not (math.isfinite(P) and P > 0):
            raise InvalidParameter("period P must be positive and finite")
        object.__setattr__(self, "P", P)
        kappa = float(self.kappa)
        if not math.isfinite(kappa):
            raise InvalidParameter("kappa must be finite")
        if kind == FKDV and kappa != 0.0:
            raise InvalidParameter("fKdV is normalized to kappa = 0")
        object.__setattr__(self, "kappa", kappa)

    def grid(self, N):
        return PeriodicGrid(self.P, N)


@dataclass
class SolutionPoint:
    phi: PeriodicField
    mu: float
    residual_norm: float
    iterations: int = 0
    history: list = field(default_factory=list)

    @property
    def max_phi(self):
        return self.phi.max()

    @property
    def min_phi(self):
        return self.phi.min()

    @property
    def crest_gap(self):
        return self.mu - self.phi.max()

    @property
    def grid(self):
        return self.phi.grid


# ---------------------------------------------------------------------------
# residuals on full-grid fields


def _square(phi, dealias):
    if dealias:
        return dealiased_product(phi, phi).values
    return phi.values**2


def residual_fkdv(phi, mu, s, dealias=False):
    """mu phi - phi^2/2 - Lambda^{-s} phi at the grid nodes."""
    L = apply_multiplier(phi, MultiplierSpec.bessel(phi.grid, s)).values
    return PeriodicField(phi.grid, mu * phi.values - 0.5 * _square(phi, dealias) - L)


def residual_fdp(phi, mu, kappa, s, dealias=False):
    """mu phi - phi^2/2 - (3/2) Lambda^{-s}(phi^2) + kappa at the grid nodes."""
    sq = PeriodicField(phi.grid, _square(phi, dealias))
    L = apply_multiplier(sq, MultiplierSpec.bessel(phi.grid, s)).values
    return PeriodicField(phi.grid, mu * phi.values - 0.5 * sq.values - 1.5 * L + kappa)


def residual_fdp_linearized(phi, mu, kappa, s, dealias=False):
    """-mu phi + phi^2/2 + (3/4) mu L^{-s} phi - kappa/4, with L^{-s} the symbol 4/(3 + <xi>^s).

    Equals -(1 + 3 Lambda^{-s})^{-1} applied to :func:`residual_fdp`, so the
    two forms vanish on the same fields.
    """
    Lphi = apply_multiplier(phi, MultiplierSpec.dp(phi.grid, s)).values
    return PeriodicField(phi.grid, -mu * phi.values + 0.5 * _square(phi, dealias) + 0.75 * mu * Lphi - 0.25 * kappa)


def residual(spec, phi, mu, dealias=False):
    if spec.kind == FKDV:
        return residual_fkdv(phi, mu, spec.s, dealias)
    return residual_fdp(phi, mu, spec.kappa, spec.s, dealias)


# ---------------------------------------------------------------------------
# cosine-coefficient discretization shared by Newton and continuation


class Discretization:
    """Residual and Jacobian of one equation in the cosine basis of an N-point grid."""

    def __init__(self, spec, N, dealias=False):
        self.spec = spec
        self.grid = spec.grid(N)
        self.basis = CosineBasis(self.grid, dealias=dealias)
        self.lam = bessel_symbol(self.grid.frequencies, spec.s)
        self.n = self.grid.n_modes

    def coefficients(self, phi):
        if phi.grid != self.grid:
            phi = resample(phi, self.grid)
        return cosine_coefficients(phi)

    def field(self, c):
        return PeriodicField(self.grid, self.basis.full_values(c))

    def residual(self, c, mu):
        sq = self.basis.product(c, c)
        if self.spec.kind == FKDV:
            return mu * c - 0.5 * sq - self.lam * c
        r = mu * c - 0.5 * sq - 1.5 * self.lam * sq
        r[0] += self.spec.kappa
        return r

    def jacobian(self, c, mu):
        M = -self.basis.product_matrix(c)
        if self.spec.kind == FKDV:
            M[np.diag_indices(self.n)] += mu - self.lam
            return M
        M *= 1.0 + 3.0 * self.lam[:, None]
        M[np.diag_indices(self.n)] += mu
        return M

    def dmu(self, c):
        """Derivative of the residual with respect to mu."""
        return c

    def nodal_norm(self, r):
        return float(np.max(np.abs(self.basis.values(r))))


def resample(phi, grid):
    """Spectral interpolation of an even field onto another grid of the same period."""
    if phi.grid.P != grid.P:
        raise InvalidParameter("cannot resample across periods")
    c = cosine_coefficients(phi)
    out = np.zeros(grid.n_modes)
    n = min(c.size, out.size)
    out[:n] = c[:n]  # zero padding or truncation of the cosine series
    return from_cosine(out, grid)


def jacobian_fkdv(phi, mu, s, dealias=False):
    """Dense cosine-basis matrix of v -> (mu - phi) v - Lambda^{-s} v."""
    spec = ProblemSpec(FKDV, s, phi.grid.P)
    d = Discretization(spec, phi.grid.N, dealias)
    return d.jacobian(cosine_coefficients(phi), mu)


def jacobian_fdp(phi, mu, kappa, s, dealias=False):
    """Dense cosine-basis matrix of v -> (mu - phi) v - 3 Lambda^{-s}(phi v)."""
    spec = ProblemSpec(FDP, s, phi.grid.P, kappa)
    d = Discretization(spec, phi.grid.N, dealias)
    return d.jacobian(cosine_coefficients(phi), mu)


# ---------------------------------------------------------------------------
# Newton


@dataclass
class NewtonOptions:
    tol: float | None = None  # defaults to 1e-11 * max(1, |mu|)
    max_iter: int = 30
    max_halvings: int = 10
    cond_cap: float = 1e14
    dealias: bool = False

    def tolerance(self, mu):
        return self.tol if self.tol is not None else 1e-11 * max(1.0, abs(mu))


def factor_checked(J, cond_cap):
    """LU factorization with a 1-norm condition estimate; raises above the cap."""
    lu = lu_factor(J, check_finite=False)
    anorm = np.max(np.sum(np.abs(J), axis=0))
    rcond, info = dgecon(lu[0], anorm, norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if not cond < cond_cap:
        raise SingularJacobian(cond)
    return lu, cond


def newton_solve(spec, phi0, mu, opts=None):
    """Solve the steady equation at fixed wave speed ``mu`` from the even seed ``phi0``.

    Damped Newton in cosine coefficients; the step is halved until the nodal
    sup-norm of the residual decreases. Stops when that norm is below
    ``opts.tolerance(mu)``.
    """
    opts = opts or NewtonOptions()
    d = Discretization(spec, phi0.grid.N, opts.dealias)
    c = d.coefficients(phi0)
    tol = opts.tolerance(mu)
    r = d.residual(c, mu)
    norm = d.nodal_norm(r)
    history = [norm]
    lu = None
    for it in range(opts.max_iter + 1):
        if norm < tol:
            if lu is not None:
                # chord polish with the last factorization, kept if it helps
                trial = c - lu_solve(lu, r, check_finite=False)
                rt = d.residual(trial, mu)
                if d.nodal_norm(rt) < norm:
                    c, r, norm = trial, rt, d.nodal_norm(rt)
                    history.append(norm)
            return SolutionPoint(d.field(c), float(mu), norm, it, history)
        if it == opts.max_iter:
            break
        lu, _ = factor_checked(d.jacobian(c, mu), opts.cond_cap)
        step = lu_solve(lu, -r, check_finite=False)
        alpha = 1.0
        for _ in range(opts.max_halvings + 1):
            trial = c + alpha * step
            rt = d.residual(trial, mu)
            nt = d.nodal_norm(rt)
            if nt < norm:
                break
            alpha *= 0.5
        else:
            raise NoConvergence(it + 1, norm, "line search failed to reduce the residual")
        c, r, norm = trial, rt, nt
        history.append(norm)
    raise NoConvergence(opts.max_iter, norm)


# ---------------------------------------------------------------------------
# bootstrap fixed-point iteration


def _mean_shift(spec, mu, psi_mean, var, current):
    """Mean m such that the period-averaged equation holds for (phi - mean(phi)) + m.

    fKdV: (mu - 1) m = (m^2 + var)/2.  fDP: 2 m^2 - mu m + 2 var - kappa = 0.
    The root closest to the current mean is taken.
    """
    if spec.kind == FKDV:
        a, b, c0 = 1.0, -2.0 * (mu - 1.0), var
    else:
        a, b, c0 = 2.0, -mu, 2.0 * var - spec.kappa
    disc = b * b - 4 * a * c0
    if disc < 0:
        return None
    r = math.sqrt(disc)
    roots = ((-b - r) / (2 * a), (-b + r) / (2 * a))
    return min(roots, key=lambda m: abs(m - current))


def bootstrap_iterate(spec, phi0, mu, kappa=None, tol=1e-12, max_iter=2000, mean_correction=True):
    """Fixed-point iteration of the square-root form of the steady equation.

    fKdV: phi <- mu - sqrt(mu^2 - 2 Lambda^{-s} phi)
    fDP:  phi <- mu - sqrt(mu^2 + 2 kappa - 3 Lambda^{-s} phi^2)

    The map never produces phi > mu, which makes it usable where the Newton
    Jacobian factor (mu - phi) degenerates. The constant mode of the map is
    expanding, so by default each iterate has its mean reset to satisfy the
    period-averaged equation (a zero-mean perturbation of the mean condition).
    Stops when the estimated distance to the fixed point, diff q / (1 - q)
    with q the observed contraction ratio, is below ``tol`` in sup-norm.

    The map is not a contraction everywhere. Its linearization scales a
    perturbation near the crest by roughly Lambda^{-s} / (mu - phi(0)), so
    close to the highest wave errors grow until the radicand turns negative;
    on fDP branches the k = 1 mode is neutral at onset and the iteration
    drifts. Converged solutions are fixed points in every regime, which is
    how the map is best used there: as an independent consistency check.
    """
    if kappa is not None and spec.kind == FDP and float(kappa) != spec.kappa:
        spec = ProblemSpec(FDP, spec.s, spec.P, kappa)
    grid = phi0.grid
    lam_op = MultiplierSpec.bessel(grid, spec.s)
    phi = phi0.values.copy()
    diffs = []
    for it in range(1, max_iter + 1):
        if spec.kind == FKDV:
            rad = mu * mu - 2.0 * apply_multiplier(PeriodicField(grid, phi), lam_op).values
        else:
            rad = mu * mu + 2.0 * spec.kappa - 3.0 * apply_multiplier(PeriodicField(grid, phi * phi), lam_op).values
        bad = np.flatnonzero(rad < 0)
        if bad.size:
            raise NegativeRadicand(int(bad[0]))
        new = mu - np.sqrt(rad)
        if mean_correction:
            mean = new.mean()
            var = float(np.mean((new - mean) ** 2))
            m = _mean_shift(spec, mu, mean, var, mean)
            if m is None:
                raise NoConvergence(it, diffs[-1] if diffs else np.inf, "mean condition has no real root")
            new = new - mean + m
        diff = float(np.max(np.abs(new - phi)))
        diffs.append(diff)
        phi = new
        if not np.all(np.isfinite(phi)):
            raise NoConvergence(it, np.inf)
        # a posteriori bound for a linearly converging iteration
        q = diff / diffs[-2] if len(diffs) > 1 and diffs[-2] > 0 else 1.0
        if diff == 0.0 or (q < 1.0 and diff * q / (1.0 - q) < tol):
            field_ = PeriodicField(grid, phi)
            res = residual(spec, field_, mu)
            return SolutionPoint(field_, float(mu), float(np.max(np.abs(res.values))), it, diffs)
    raise NoConvergence(max_iter, diffs[-1])
