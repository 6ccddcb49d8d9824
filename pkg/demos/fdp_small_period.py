"""fDP: admissibility window, bifurcation point and branch for a small period.

Run:  python3 demos/fdp_small_period.py
"""
import math

import numpy as np

from fracwave import (
    ContinuationOptions,
    InadmissibleMode,
    ProblemSpec,
    bifurcation_point_fdp,
    check_admissible,
    continue_branch,
    mu_upper_bound_check_fdp,
)
from fracwave.bifurcation import admissibility_boundary

s, kappa = 0.5, 1.0
print(f"kappa > 0 needs 2 pi / P > {admissibility_boundary(s):.6f}")
for P in (2 * math.pi, 1.0, 0.5):
    try:
        check_admissible(P, s, kappa)
        bp = bifurcation_point_fdp(P, s, kappa)
        print(f"P = {P:.4f}: mu* = {bp.mu_star:.12f}, gamma_+ = {bp.constant_state:.12f}")
    except InadmissibleMode as e:
        print(f"P = {P:.4f}: {e}")

spec = ProblemSpec("fdp", s, 0.5, kappa)
branch = continue_branch(spec, opts=ContinuationOptions(N=512))
mu = np.array([r.mu for r in branch.rows])
gap = np.array([r.crest_gap for r in branch.rows])
print(f"{len(mu)} points, mu from {mu[0]:.6f} to {mu[-1]:.6f}, final crest gap {gap[-1]:.2e}")
print(f"termination: {branch.termination.value}")
print(mu_upper_bound_check_fdp(branch.points[-1], kappa, s, spec.P).summary())
