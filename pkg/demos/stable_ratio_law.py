"""The ratio ||Tx|| / ||x|| of a 1-stable sketch follows a fixed law.

Draw a sketch operator, push many directions through it and compare the
empirical CDF of the ratio with erfc(1/(2x)).
"""
import math

import numpy as np
from scipy import special

from l1lab.stable import calibrate_C, ks_distance_p1, sample_ratios

J = 5000
cal = calibrate_C(1.0, J=J, n_samples=20_000, seed=0)
print(f"calibrated C = {cal.C:.4f}  (1/sqrt(pi) = {1 / math.sqrt(math.pi):.4f})")

X = sample_ratios(1.0, J, cal.C, 50_000, seed=1)
print(f"KS distance to erfc(1/2x): {ks_distance_p1(X):.4f}")

# a few quantiles side by side
for q in (0.1, 0.5, 0.9):
    emp = np.quantile(X, q)
    exact = 1 / (2 * special.erfcinv(q))
    print(f"  q={q:.1f}  empirical {emp:7.4f}  exact {exact:7.4f}")

# the Laplace transform of X^2 is exp(-sqrt(a))
for a in (0.25, 1.0, 4.0):
    print(f"  E exp(-{a} X^2) = {np.mean(np.exp(-a * X ** 2)):.4f}  vs {math.exp(-math.sqrt(a)):.4f}")
