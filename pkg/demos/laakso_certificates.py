"""Laakso graphs: doubling, exactly l_1, but costly in l_2.

Level 1 embeds isometrically into l_1 (checked by a cut LP). Any l_2
image of level i pays at least sqrt(1 + i/4); we certify that for an
MDS-style stress embedding.
"""
import math

from l1lab.graphs import laakso, shortest_path_metric
from l1lab.lower_bounds import certify_laakso_embedding, stress_embedding
from l1lab.metric import doubling_constant
from l1lab.realize import l1_realize

for i in (1, 2):
    G = laakso(i)
    M = shortest_path_metric(G)
    img = stress_embedding(M, seed=i)
    cert = certify_laakso_embedding(G, img)
    print(f"G_{i}: n={M.n:3d}  doubling={doubling_constant(M)}  "
          f"l2 distortion >= {cert.achieved:.3f} (bound {math.sqrt(1 + i / 4):.3f})")

real = l1_realize(laakso(1))
print(f"l1 realization of G_1: {len(real.cuts)} cuts, distortion {real.distortion:.6f}")
