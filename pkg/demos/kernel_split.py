"""K_s near the origin: quadrature value, error bound and the split c_s |x|^(s-1) + H_s.

Run:  python3 demos/kernel_split.py
"""
import numpy as np

from fracwave.cli import kernel_table
from fracwave.kernel import certify_complete_monotonicity, kernel_integral, singular_coefficient

for s in (0.25, 0.5, 0.75):
    print(f"s = {s}: c_s = {singular_coefficient(s):.15f}, integral = {kernel_integral(s)[0]:.15f}")
    table = kernel_table(s, 1e-3, 0.9, 6)
    for x, k, err, sing, reg in table:
        print(f"   x = {x:9.3e}  K = {k:.12e}  (+- {err:.1e})  H_s = {reg:+.9f}")
    rep = certify_complete_monotonicity(s, 4, np.geomspace(1e-3, 10.0, 30))
    print("   complete monotonicity to order 4:", "certified" if rep.passed else "not certified")
