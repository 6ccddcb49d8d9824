"""Pseudo-arclength continuation of the k = 1 branch toward the highest wave.

Unknowns are X = (c, mu), with c the cosine coefficients of phi. The first two
points are fixed-amplitude solves (c_1 = t0 and 2 t0) seeded from the local
expansion; after that each step predicts along the secant and corrects with
Newton on the bordered system

    [ J        dR/dmu ] [dc ]     [ R(c, mu)                 ]
    [ w tau_c  tau_mu ] [dmu] = - [ <tau, X - X_prev>_w - h  ]

where <.,.>_w is the discrete L2 inner product (weights 1, 1/2, ..., 1/2, 1 on
the coefficients, 1 on mu).
"""
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import lu_solve

from .bifurcation import gamma_pm, local_expansion
from .errors import InvalidParameter, SingularJacobian
from .solvers import FDP, FKDV, Discretization, SolutionPoint, factor_checked


class Termination(str, Enum):
    CREST_GAP_TOL = "CrestGapTol"
    STEP_LIMIT = "StepLimit"
    NO_CONVERGENCE = "NoConvergence"
    LEFT_ADMISSIBLE_SET = "LeftAdmissibleSet"
    MU_BOUND_EXCEEDED = "MuBoundExceeded"


@dataclass
class ContinuationOptions:
    N: int = 1024
    t0: float = 0.01
    max_steps: int = 500
    gap_tol: float = 1e-2  # relative to mu
    h_max_factor: float = 8.0
    grow: float = 1.3
    easy_iterations: int = 3
    easy_steps: int = 2
    h_min: float = 1e-12
    newton_tol: float | None = None  # 1e-11 * max(1, |mu|)
    max_corrector: int = 12
    cond_cap: float = 1e14
    dealias: bool = False
    mu_max: float | None = None  # fDP default: 20 mu*
    monotone_tol: float = 1e-10

    def validate(self):
        if int(self.N) != self.N or self.N < 8 or self.N % 2:
            raise InvalidParameter("N must be an even integer >= 8")
        if not self.t0 > 0:
            raise InvalidParameter("t0 must be positive")
        if not self.gap_tol > 0:
            raise InvalidParameter("gap_tol must be positive")
        if self.max_steps < 2:
            raise InvalidParameter("max_steps must be at least 2")
        return self


@dataclass
class BranchRow:
    step: int
    t: float
    mu: float
    max_phi: float
    min_phi: float
    crest_gap: float
    residual_norm: float
    N: int

    def as_tuple(self):
        return (self.step, self.t, self.mu, self.max_phi, self.min_phi, self.crest_gap, self.residual_norm, self.N)


@dataclass
class ContinuationState:
    """Everything the next step depends on; enough to resume bit-for-bit."""

    step: int  # index of the last accepted point
    t: float  # arclength of the last accepted point
    X_prev: np.ndarray
    X_curr: np.ndarray
    h: float
    easy: int


@dataclass
class Branch:
    spec: object
    options: ContinuationOptions
    mu_star: float
    constant_state: float
    points: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    steps: list = field(default_factory=list)  # accepted arclength step sizes
    termination: Termination | None = None
    message: str = ""
    gap_increases: list = field(default_factory=list)  # steps where crest_gap grew
    state: ContinuationState | None = None

    @property
    def last(self):
        return self.points[-1] if self.points else None


class _StepFailure(Exception):
    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


class BranchTracer:
    """Stateful continuation driver; :func:`continue_branch` wraps it."""

    def __init__(self, spec, opts=None):
        self.spec = spec
        self.opts = (opts or ContinuationOptions()).validate()
        self.disc = Discretization(spec, self.opts.N, self.opts.dealias)
        n = self.disc.n
        w = np.full(n + 1, 0.5)
        w[0] = w[n - 1] = w[n] = 1.0
        self.w = w
        self.expansion = local_expansion(spec)
        if self.opts.mu_max is None and spec.kind == FDP:
            self.mu_max = 20.0 * self.expansion.mu0
        else:
            self.mu_max = self.opts.mu_max
        self.X_star = np.zeros(n + 1)
        self.X_star[0] = self.expansion.phi0
        self.X_star[n] = self.expansion.mu0

    # -- helpers ------------------------------------------------------------

    def norm(self, v):
        return math.sqrt(float(np.sum(self.w * v * v)))

    def tol(self, mu):
        return self.opts.newton_tol if self.opts.newton_tol is not None else 1e-11 * max(1.0, abs(mu))

    def point(self, X, iterations=0, history=None):
        c, mu = X[:-1], float(X[-1])
        r = self.disc.nodal_norm(self.disc.residual(c, mu))
        return SolutionPoint(self.disc.field(c), mu, r, iterations, history or [])

    def _solve(self, X, border_row, border_rhs):
        """Newton on [R; border] = 0 starting from X. Returns (X, iterations, history)."""
        n = self.disc.n
        history = []
        lu = None
        for it in range(self.opts.max_corrector + 1):
            c, mu = X[:n], X[n]
            r = self.disc.residual(c, mu)
            g = border_rhs(X)
            norm = self.disc.nodal_norm(r)
            history.append(norm)
            if not np.isfinite(norm):
                raise _StepFailure("non-finite residual")
            if norm < self.tol(mu) and abs(g) < 1e3 * self.tol(mu):
                return self._polish(X, lu, border_rhs, norm), it, history
            if it == self.opts.max_corrector:
                break
            if it >= 2 and norm > history[-2]:
                raise _StepFailure("corrector diverging")
            J = np.empty((n + 1, n + 1))
            J[:n, :n] = self.disc.jacobian(c, mu)
            J[:n, n] = self.disc.dmu(c)
            J[n, :] = border_row
            try:
                lu, _ = factor_checked(J, self.opts.cond_cap)
            except SingularJacobian as e:
                raise _StepFailure(f"bordered Jacobian condition {e.condition:.3e} above cap") from e
            X = X - lu_solve(lu, np.append(r, g), check_finite=False)
        raise _StepFailure("corrector did not converge")

    def _polish(self, X, lu, border_rhs, norm):
        """One chord step with the last factorization; kept only if it lowers the residual.

        Quadratic convergence leaves the converged residual near the stopping
        tolerance; the extra solve costs O(n^2) and usually reaches roundoff,
        which matters for identities measured relative to small amplitudes.
        """
        if lu is None:
            return X
        n = self.disc.n
        Y = X - lu_solve(lu, np.append(self.disc.residual(X[:n], X[n]), border_rhs(X)), check_finite=False)
        if self.disc.nodal_norm(self.disc.residual(Y[:n], Y[n])) < norm:
            return Y
        return X

    def fixed_amplitude(self, amp):
        n = self.disc.n
        c, mu = self.expansion.cosine_seed(amp, n)
        row = np.zeros(n + 1)
        row[1] = 1.0
        X, it, hist = self._solve(np.append(c, mu), row, lambda X: X[1] - amp)
        return X, it, hist

    def admissibility(self, X):
        """Reason string if X leaves the admissible set, else None."""
        n = self.disc.n
        c, mu = X[:n], X[n]
        half = self.disc.basis.values(c)  # crest at index 0, trough at the end
        if not mu - half.max() > 0:
            return "crest reached the wave speed"
        scale = max(1.0, float(np.max(np.abs(half))))
        if np.any(np.diff(half) > self.opts.monotone_tol * scale):
            return "profile not monotone between trough and crest"
        if self.spec.kind == FKDV and not (0.0 < mu < 1.0):
            return f"wave speed {mu:.6g} outside (0, 1)"
        if self.spec.kind == FDP:
            kappa = self.spec.kappa
            if kappa > 0 and not mu > math.sqrt(kappa):
                return f"wave speed {mu:.6g} not above sqrt(kappa)"
            if mu * mu + 8 * kappa < 0 or not half.max() > gamma_pm(mu, kappa)[1]:
                return "crest not above gamma_+"
        return None

    # -- driver -------------------------------------------------------------

    def start(self, branch):
        t0 = self.opts.t0
        X0, it0, h0 = self.fixed_amplitude(t0)
        X1, it1, h1 = self.fixed_amplitude(2 * t0)
        tA = self.norm(X0 - self.X_star)
        tB = tA + self.norm(X1 - X0)
        self._accept(branch, X0, 0, tA, it0, h0)
        self._accept(branch, X1, 1, tB, it1, h1)
        return ContinuationState(1, tB, X0, X1, t0, 0)

    def _accept(self, branch, X, step, t, iterations, history):
        p = self.point(X, iterations, history)
        if branch.points and p.crest_gap > branch.points[-1].crest_gap:
            branch.gap_increases.append(step)
        branch.points.append(p)
        branch.rows.append(BranchRow(step, float(t), p.mu, p.max_phi, p.min_phi, p.crest_gap,
                                     p.residual_norm, self.opts.N))
        return p

    def _terminal(self, p):
        if p.crest_gap < self.opts.gap_tol * p.mu:
            return Termination.CREST_GAP_TOL, f"crest gap {p.crest_gap:.3e} below {self.opts.gap_tol:g} mu"
        if self.mu_max is not None and p.mu > self.mu_max:
            return Termination.MU_BOUND_EXCEEDED, f"wave speed {p.mu:.6g} above {self.mu_max:.6g}"
        return None

    def step(self, state):
        """Advance one accepted point. Returns (new_state, X, iterations, history) or raises."""
        n = self.disc.n
        o = self.opts
        tangent = state.X_curr - state.X_prev
        tangent /= self.norm(tangent)
        wt = self.w * tangent
        h_max = o.h_max_factor * o.t0
        h = state.h
        last = "step size underflow"
        while h >= o.h_min:
            pred = state.X_curr + h * tangent
            rhs = lambda X, h=h: float(wt @ (X - state.X_curr)) - h
            try:
                X, it, hist = self._solve(pred, wt, rhs)
                bad = self.admissibility(X)
                if bad is None:
                    easy = state.easy + 1 if it <= o.easy_iterations else 0
                    h_next = h
                    if easy >= o.easy_steps:
                        h_next, easy = min(h * o.grow, h_max), 0
                    new = ContinuationState(state.step + 1, state.t + h, state.X_curr, X, h_next, easy)
                    return new, X, it, hist, h
                last = bad
                self._last_kind = "admissible"
            except _StepFailure as e:
                last = e.reason
                self._last_kind = "solver"
            h *= 0.5
        raise _StepFailure(last)

    def run(self, branch, state=None, callback=None):
        o = self.opts
        if state is None:
            try:
                state = self.start(branch)
            except _StepFailure as e:
                branch.termination = Termination.NO_CONVERGENCE
                branch.message = f"seed solve failed: {e.reason}"
                return branch
            if callback:
                callback(branch, state)
            for p in branch.points:
                if (bad := self.admissibility(np.append(self.disc.coefficients(p.phi), p.mu))) is not None:
                    branch.termination, branch.message = Termination.LEFT_ADMISSIBLE_SET, bad
                    branch.state = state
                    return branch
            term = self._terminal(branch.points[-1])
            if term:
                branch.termination, branch.message = term
                branch.state = state
                return branch
        self._last_kind = "solver"
        while state.step + 1 < o.max_steps:
            try:
                state, X, it, hist, h = self.step(state)
            except _StepFailure as e:
                kind = Termination.LEFT_ADMISSIBLE_SET if self._last_kind == "admissible" else Termination.NO_CONVERGENCE
                branch.termination, branch.message = kind, str(e.reason)
                branch.state = state
                return branch
            branch.steps.append(h)
            p = self._accept(branch, X, state.step, state.t, it, hist)
            branch.state = state
            if callback:
                callback(branch, state)
            term = self._terminal(p)
            if term:
                branch.termination, branch.message = term
                return branch
        branch.termination = Termination.STEP_LIMIT
        branch.message = f"reached {o.max_steps} points"
        branch.state = state
        return branch


def continue_branch(spec, start=None, opts=None, resume=None, callback=None):
    """Follow the k = 1 branch from its bifurcation point.

    ``start`` may be given for bookkeeping; the branch always starts from the
    first bifurcation point of ``spec``. ``resume`` is a
    :class:`ContinuationState` from a checkpoint; rows before it are not
    recomputed. ``callback(branch, state)`` runs after every accepted point.
    """
    tracer = BranchTracer(spec, opts)
    if start is not None and abs(start.mu_star - tracer.expansion.mu0) > 1e-12 * max(1.0, abs(start.mu_star)):
        raise InvalidParameter("only the first bifurcation point is continued")
    branch = Branch(spec, tracer.opts, tracer.expansion.mu0, tracer.expansion.phi0)
    if resume is not None:
        if resume.X_curr.size != tracer.disc.n + 1:
            raise InvalidParameter("checkpoint resolution does not match N")
        branch.state = resume
    return tracer.run(branch, state=resume, callback=callback)
