"""Snowflake embeddings built from padded decompositions, one per scale.

Distortion of (X, d^(1-eps)) into l_2 grows like 1/sqrt(eps), so the
product distortion * sqrt(eps) should stay in a narrow band.
"""
import math

from l1lab.decomp import SnowflakeParams, laakso_snowflake_lowerbound, snowflake_embed
from l1lab.graphs import laakso, shortest_path_metric

M = shortest_path_metric(laakso(2))
for eps in (0.5, 0.25, 0.125):
    res = snowflake_embed(M, eps, SnowflakeParams(8, 32), seed=0)
    D = res.report.distortion
    print(f"eps={eps:<5}  scales {res.embedding.n_min}..{res.embedding.n_max}  "
          f"distortion {D:.3f}  x sqrt(eps) {D * math.sqrt(eps):.3f}  "
          f"floor {laakso_snowflake_lowerbound(2, eps):.3f}")
