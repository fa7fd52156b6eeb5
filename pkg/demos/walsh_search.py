"""No linear map sends the Walsh point set into l_2 too cheaply.

A smoothed min-max search looks for the best linear map; the result
should land on, never below, the closed-form bound.
"""
from l1lab.graphs import walsh_pointset
from l1lab.lower_bounds import heuristic_best_linear, walsh_bound

for k in (1, 2, 3):
    for p in (1.0, 1.5):
        A = walsh_pointset(k, p)
        _, rep = heuristic_best_linear(A, restarts=4, seed=k)
        print(f"k={k} p={p}: searched {rep.distortion:.4f}  bound {walsh_bound(k, p):.4f}")
