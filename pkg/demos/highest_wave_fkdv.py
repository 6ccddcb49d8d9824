"""Follow the fKdV branch from its first bifurcation point toward the highest wave.

Prints the branch table, then fits the crest exponent of the last profile.
Run:  python3 demos/highest_wave_fkdv.py [s] [N]
"""
import math
import sys

from fracwave import ContinuationOptions, ProblemSpec, continue_branch, estimate_holder_exponent, run_diagnostics

s = float(sys.argv[1]) if len(sys.argv) > 1 else 0.5
N = int(sys.argv[2]) if len(sys.argv) > 2 else 512

spec = ProblemSpec("fkdv", s, 2 * math.pi)
branch = continue_branch(spec, opts=ContinuationOptions(N=N))

print(f"{'step':>4} {'mu':>12} {'max phi':>12} {'min phi':>12} {'crest gap':>11}")
for r in branch.rows:
    print(f"{r.step:4d} {r.mu:12.8f} {r.max_phi:12.8f} {r.min_phi:12.8f} {r.crest_gap:11.3e}")
print(f"termination: {branch.termination.value} ({branch.message})")

last = branch.points[-1]
fit = estimate_holder_exponent(last)
print(f"crest exponent {fit.alpha_hat:.4f} (s = {s}), r^2 = {fit.r_squared:.5f}, window {fit.fit_window}")
print(run_diagnostics(last, spec).summary())
