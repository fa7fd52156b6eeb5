"""Embed an l_1 point set into l_2 by resampling stable sketches.

The sketch never shrinks distances too much once it clears the
1/sqrt(8 ln n) threshold, and that usually happens on the first draw.
"""
from l1lab.graphs import random_pointset
from l1lab.stable import embed_theorem1

ps = random_pointset(64, 16, 1.0, seed=3)
res = embed_theorem1(ps, J=5000, seed=0)

rep = res.report
print(f"tries used      : {res.tries_used}")
print(f"threshold       : {res.threshold:.4f}")
print(f"co-Lipschitz    : {rep.colipschitz:.4f}")
print(f"avg expansion   : {rep.avg_expansion:.4f}")
print(f"worst distortion: {rep.distortion:.2f}")
