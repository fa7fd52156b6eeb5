"""Lipschitz functions on the hypercube concentrate around their mean.

Distance to a fixed vertex is 1-Lipschitz. The fraction of vertices
deviating from the mean by k / (4 alpha) or more stays below
2 exp(-k / (32 alpha^2)); for small k that bound is loose, so watch the
tail itself shrink as k grows.
"""
import numpy as np

from l1lab.graphs import hamming_weight
from l1lab.lower_bounds import hypercube_concentration_check

for k in (8, 10, 12):
    f = hamming_weight(np.arange(2 ** k)).astype(float)
    for alpha in (1.0, 2.0):
        cert = hypercube_concentration_check(f, alpha)
        print(f"k={k:2d} alpha={alpha}: tail {cert.achieved:.2e} <= bound {cert.bound:.3f}  "
              f"{'ok' if cert.passed else 'FAIL'}")
