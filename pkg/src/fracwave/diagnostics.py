"""Property checks on computed traveling waves.

Every threshold and the law it tests live in CHECK_TABLE; the functions
below only measure and compare.
"""
import math
from dataclasses import dataclass

import numpy as np

from .bifurcation import gamma_pm, mu_upper_bound_check_fdp
from .errors import WindowTooSmall
from .report import Check, DiagnosticsReport
from .solvers import FDP, FKDV, residual, residual_fdp_linearized
from .spectral import spectral_derivative

STRICT = 1e-10  # "strictly positive" means > STRICT * scale

# name: (threshold, law)
CHECK_TABLE = {
    "even": (1e-12, "traveling waves are even about the crest"),
    "increasing on (-P/2, 0)": (0.0, "phi' > 0 strictly between trough and crest"),
    "below wave speed": (0.0, "phi < mu everywhere"),
    "phi'' at crest": (0.0, "phi''(0) < 0 for smooth nonconstant waves"),
    "phi'' at trough": (0.0, "phi''(+-P/2) > 0 for smooth nonconstant waves"),
    "lower bound 2(mu-1)": (-1e-10, "2(mu - 1) <= min phi (fKdV, mu <= 1)"),
    "min phi <= 0": (-1e-10, "min phi <= 0 (fKdV, mu <= 1)"),
    "max phi >= 0": (-1e-10, "max phi >= 0 (fKdV, mu <= 1)"),
    "L2 identity": (1e-9, "||phi||^2 = 2(mu - 1) int phi over one period (fKdV)"),
    "lower bound gamma_-": (-1e-10, "gamma_- <= min phi (fDP)"),
    "min phi <= gamma_+": (-1e-10, "min phi <= gamma_+ (fDP)"),
    "max phi >= gamma_+": (-1e-10, "gamma_+ <= max phi (fDP)"),
    "trough gap": (STRICT, "mu - phi(-P/2) stays bounded away from zero"),
    "cusp exponent": (0.1, "mu - phi(x) ~ |x|^s near the crest of the highest wave"),
    "smooth exponent": (0.2, "phi(0) - phi(x) ~ x^2 at a smooth crest"),
    "residual forms agree": (1e-9, "both fDP residual forms vanish on solutions"),
}


def _check(name, ok, value, detail="", N=None, tol=None, status=None):
    threshold, law = CHECK_TABLE[name]
    return Check(name=name, status=status or ("pass" if ok else "fail"), value=float(value),
                 threshold=threshold, anchor=law, detail=detail, N=N, tol=tol)


def _is_constant(phi):
    v = phi.values
    return np.ptp(v) <= 1e-12 * max(1.0, float(np.max(np.abs(v))))


def check_nodal(point, gap_tol=1e-2):
    """Evenness, monotonicity on (-P/2, 0), phi < mu, and the sign of phi'' at crest and trough.

    Near the highest wave (crest_gap < 10 gap_tol mu) the truncated Fourier
    series rings next to the cusp, so phi' is judged there by nodal forward
    differences instead of the spectral derivative, and the phi'' checks are
    skipped since the second derivative blows up.
    """
    phi = point.phi
    N = phi.grid.N
    rep = DiagnosticsReport(f"nodal properties (N={N})")
    defect = phi.evenness_defect()
    rep.add(_check("even", defect <= CHECK_TABLE["even"][0], defect, N=N, tol=CHECK_TABLE["even"][0]))
    constant = _is_constant(phi)
    gap = point.crest_gap
    sharp = gap < 10 * gap_tol * point.mu
    if constant:
        rep.add(_check("increasing on (-P/2, 0)", True, 0.0, "constant field", N=N, status="skip"))
    else:
        if sharp:
            d1 = np.diff(phi.values[: N // 2 + 1])
            how = "min forward difference / max, trough to crest"
        else:
            d1 = spectral_derivative(phi, 1).values[1: N // 2]
            how = "min phi'/max|phi'| at interior nodes"
        m = float(d1.min() / max(float(np.max(np.abs(d1))), np.finfo(float).tiny))
        rep.add(_check("increasing on (-P/2, 0)", m > STRICT, m, how, N=N, tol=STRICT))
    rep.add(_check("below wave speed", gap > 0, gap, "mu - max phi", N=N))
    if constant or sharp:
        why = "constant field" if constant else f"crest gap {gap:.3g} < 10 gap_tol mu"
        rep.add(_check("phi'' at crest", True, math.nan, why, N=N, status="skip"))
        rep.add(_check("phi'' at trough", True, math.nan, why, N=N, status="skip"))
    else:
        d2 = spectral_derivative(phi, 2).values
        s2 = max(float(np.max(np.abs(d2))), np.finfo(float).tiny)
        crest, trough = d2[N // 2], d2[0]
        rep.add(_check("phi'' at crest", crest < -STRICT * s2, crest, N=N, tol=STRICT * s2))
        rep.add(_check("phi'' at trough", trough > STRICT * s2, trough, N=N, tol=STRICT * s2))
    return rep


def check_bounds(point, spec):
    """A priori range bounds and, for fKdV, the L2 identity (trapezoid rule)."""
    phi = point.phi
    N = phi.grid.N
    v = phi.values
    mu = point.mu
    scale = max(1.0, float(np.max(np.abs(v))), abs(mu))
    lo, hi = float(v.min()), float(v.max())
    rep = DiagnosticsReport(f"a priori bounds (N={N})")

    def margin(name, m):
        thr = CHECK_TABLE[name][0] * scale
        rep.add(_check(name, m >= thr, m, N=N, tol=abs(thr)))

    if spec.kind == FKDV:
        if mu <= 1:
            margin("lower bound 2(mu-1)", lo - 2 * (mu - 1))
            if _is_constant(phi):
                for name in ("min phi <= 0", "max phi >= 0"):
                    rep.add(_check(name, True, math.nan, "constant field", N=N, status="skip"))
            else:
                margin("min phi <= 0", -lo)
                margin("max phi >= 0", hi)
        # trapezoid rule on a periodic grid is the plain mean
        lhs = float(np.mean(v * v))
        rhs = 2 * (mu - 1) * float(np.mean(v))
        denom = max(abs(lhs), abs(rhs))
        rel = abs(lhs - rhs) / denom if denom > 0 else 0.0
        thr = CHECK_TABLE["L2 identity"][0]
        rep.add(_check("L2 identity", rel < thr, rel, f"|phi|^2 mean = {lhs:.12g}", N=N, tol=thr))
    else:
        gm, gp = gamma_pm(mu, spec.kappa)
        margin("lower bound gamma_-", lo - gm)
        if _is_constant(phi):
            for name in ("min phi <= gamma_+", "max phi >= gamma_+"):
                rep.add(_check(name, True, math.nan, "constant field", N=N, status="skip"))
        else:
            margin("min phi <= gamma_+", gp - lo)
            margin("max phi >= gamma_+", hi - gp)
    return rep


@dataclass(frozen=True)
class HolderFit:
    alpha_hat: float
    c_hat: float
    fit_window: tuple
    r_squared: float
    n_points: int
    alpha_speed: float  # same fit applied to mu - phi instead of phi(0) - phi


def _loglog(x, y):
    lx, ly = np.log(x), np.log(y)
    slope, icpt = np.polyfit(lx, ly, 1)
    pred = slope * lx + icpt
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(math.exp(icpt)), r2


def estimate_holder_exponent(point, window=None):
    """Least-squares fit of log(phi(0) - phi(x)) against log|x| near the crest.

    The default window is [4 P/N, P/16]. The crest deficit phi(0) - phi(x) is
    used so that the same fit gives 2 at a smooth crest and s at a cusp, where
    it coincides with mu - phi(x); the fit of mu - phi is reported alongside as
    ``alpha_speed``.
    """
    grid = point.phi.grid
    P, N = grid.P, grid.N
    x_lo, x_hi = window if window is not None else (4 * P / N, P / 16)
    if x_lo < 2 * grid.dx * (1 - 1e-12):
        raise WindowTooSmall("fit window must exclude the innermost two grid cells")
    m = np.arange(1, N // 2 + 1)
    x = m * grid.dx
    sel = (x >= x_lo * (1 - 1e-12)) & (x <= x_hi * (1 + 1e-12))
    if sel.sum() < 8:
        raise WindowTooSmall(f"only {int(sel.sum())} nodes in [{x_lo:.3g}, {x_hi:.3g}]; need 8")
    v = point.phi.values
    crest = v[N // 2]
    right = v[(N // 2 + m[sel]) % N]  # nodes x = m dx to the right of the crest
    deficit = crest - right
    speed = point.mu - right
    if np.any(deficit <= 0) or np.any(speed <= 0):
        raise WindowTooSmall("profile is not below its crest throughout the fit window")
    a, c, r2 = _loglog(x[sel], deficit)
    a_speed, _, _ = _loglog(x[sel], speed)
    return HolderFit(a, c, (float(x_lo), float(x_hi)), r2, int(sel.sum()), a_speed)


def check_regularity_lower_bound(point):
    """Trough gap mu - phi(-P/2): must be strictly positive; its ratio to mu is reported."""
    N = point.phi.grid.N
    gap = point.mu - point.phi.at_trough()
    scale = max(1.0, abs(point.mu))
    rep = DiagnosticsReport(f"trough gap (N={N})")
    rep.add(_check("trough gap", gap > STRICT * scale, gap, f"ratio to mu = {gap / point.mu:.6g}",
                   N=N, tol=STRICT * scale))
    return rep


def _relative_gap(point, spec):
    """crest_gap over the gap mu - phi_const(mu) of the constant state."""
    base = 0.0 if spec.kind == FKDV else gamma_pm(point.mu, spec.kappa)[1]
    return point.crest_gap / (point.mu - base)


def check_exponent(point, spec, gap_tol=1e-2, smooth_ratio=0.75):
    """Cusp exponent near the highest wave, parabolic exponent at small amplitude.

    Exactly one of the two is asserted, chosen by crest_gap: cusp when
    crest_gap < gap_tol mu; smooth when crest_gap still covers at least
    ``smooth_ratio`` of the gap between mu and the constant state (amplitude
    at most a quarter of that gap by default). In between nothing is asserted.
    """
    N = point.phi.grid.N
    rep = DiagnosticsReport(f"crest exponent (N={N})")
    gap = point.crest_gap
    if _is_constant(point.phi):
        rep.add(_check("smooth exponent", True, math.nan, "constant field", N=N, status="skip"))
        return rep
    try:
        fit = estimate_holder_exponent(point)
    except WindowTooSmall as e:
        rep.add(_check("cusp exponent", True, math.nan, str(e), N=N, status="skip"))
        return rep
    ratio = _relative_gap(point, spec)
    info = (f"window [{fit.fit_window[0]:.4g}, {fit.fit_window[1]:.4g}], r^2 = {fit.r_squared:.5f}, "
            f"mu - phi fit {fit.alpha_speed:.4f}, relative gap {ratio:.4f}")
    if gap < gap_tol * point.mu:
        thr = CHECK_TABLE["cusp exponent"][0]
        rep.add(_check("cusp exponent", abs(fit.alpha_hat - spec.s) <= thr, fit.alpha_hat, info, N=N, tol=thr))
    elif ratio >= smooth_ratio:
        thr = CHECK_TABLE["smooth exponent"][0]
        rep.add(_check("smooth exponent", abs(fit.alpha_hat - 2) <= thr, fit.alpha_hat, info, N=N, tol=thr))
    else:
        rep.add(_check("cusp exponent", True, fit.alpha_hat, "intermediate crest gap: " + info, N=N, status="skip"))
    return rep


def check_residual_forms(point, spec):
    """fDP only: both residual forms are small on a converged point."""
    N = point.phi.grid.N
    rep = DiagnosticsReport(f"residual forms (N={N})")
    r1 = float(np.max(np.abs(residual(spec, point.phi, point.mu).values)))
    r2 = float(np.max(np.abs(residual_fdp_linearized(point.phi, point.mu, spec.kappa, spec.s).values)))
    thr = CHECK_TABLE["residual forms agree"][0] * max(1.0, abs(point.mu))
    rep.add(_check("residual forms agree", max(r1, r2) < thr, max(r1, r2),
                   f"Lambda form {r1:.3g}, L form {r2:.3g}", N=N, tol=thr))
    return rep


def run_diagnostics(point, spec, gap_tol=1e-2):
    """The full battery for one solution point."""
    rep = DiagnosticsReport(f"diagnostics for {spec.kind} s={spec.s:g} P={spec.P:g} N={point.phi.grid.N} mu={point.mu:.12g}")
    rep.extend(check_nodal(point, gap_tol))
    rep.extend(check_bounds(point, spec))
    if not _is_constant(point.phi):
        rep.extend(check_regularity_lower_bound(point))
    rep.extend(check_exponent(point, spec, gap_tol))
    if spec.kind == FDP:
        rep.extend(check_residual_forms(point, spec))
        rep.extend(mu_upper_bound_check_fdp(point, spec.kappa, spec.s, spec.P))
    return rep
