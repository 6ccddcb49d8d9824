"""Periodic traveling waves of the fractional KdV and Degasperis-Procesi equations."""

__version__ = "0.1.0"

from .bifurcation import (
    BifurcationPoint,
    LocalExpansion,
    bifurcation_point,
    bifurcation_point_fdp,
    bifurcation_points_fkdv,
    check_admissible,
    constant_solutions_fdp,
    local_expansion,
    mu_upper_bound_check_fdp,
)
from .continuation import Branch, ContinuationOptions, ContinuationState, Termination, continue_branch
from .diagnostics import estimate_holder_exponent, run_diagnostics
from .errors import *  # noqa: F401,F403
from .kernel import (
    bessel_kernel,
    bessel_symbol,
    certify_complete_monotonicity,
    dp_symbol,
    periodic_convolution,
    periodic_kernel,
    singular_split,
)
from .report import Check, DiagnosticsReport
from .solvers import FDP, FKDV, NewtonOptions, ProblemSpec, SolutionPoint, bootstrap_iterate, newton_solve, residual
from .spectral import MultiplierSpec, PeriodicField, PeriodicGrid, apply_multiplier
