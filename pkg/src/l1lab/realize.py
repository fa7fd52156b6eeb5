"""l_1 realizations of graph metrics as nonnegative combinations of cut semimetrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import RealizationFailed, ResourceLimit
from .graphs import WeightedGraph, shortest_path_metric
from .metric import DistortionReport, PointSet, distortion_report

ALL_CUTS_MAX_N = 20
REALIZE_MAX_N = 40


@dataclass(frozen=True)
class Realization:
    points: PointSet
    distortion: float
    report: DistortionReport
    cuts: list  # bitmask of the side not containing vertex 0, one per coordinate
    weights: np.ndarray


def all_cuts(n: int) -> list[int]:
    """Every nontrivial cut, as the bitmask of the side avoiding vertex 0."""
    full = (1 << n) - 1
    return [full ^ (s << 1 | 1) for s in range(1 << (n - 1)) if (s << 1 | 1) != full]


def connected_cuts(G: WeightedGraph) -> list[int]:
    """Cuts whose two sides both induce connected subgraphs.

    Enumerates connected vertex sets containing vertex 0 (each exactly once)
    and keeps those with a nonempty connected complement.
    """
    adj = G.adjacency_masks()
    n = G.n_vertices
    full = (1 << n) - 1
    out = []

    def connected(mask: int) -> bool:
        start = mask & -mask
        seen, frontier = start, start
        while frontier:
            low = frontier & -frontier
            frontier ^= low
            nb = adj[low.bit_length() - 1] & mask & ~seen
            seen |= nb
            frontier |= nb
        return seen == mask

    def grow(S: int, cand: int, banned: int):
        rest = full & ~S
        if rest and connected(rest):
            out.append(rest)
        while cand:
            low = cand & -cand
            cand ^= low
            v = low.bit_length() - 1
            T = S | low
            grow(T, (cand | adj[v]) & ~T & ~banned, banned)
            banned |= low

    grow(1, adj[0], 1)
    return out


def l1_realize(G: WeightedGraph, max_distortion: float = 1.0 + 1e-6,
               cuts: list[int] | None = None) -> Realization:
    """Realize the shortest-path metric of ``G`` in l_1 with minimal distortion
    over the available cuts.

    Solves: minimize t subject to d(x, y) <= sum_S w_S [S separates x, y]
    <= t d(x, y), w >= 0. All cuts are used for n <= 20, connected cuts
    above that. Coordinates are w_S * indicator(x in S).
    """
    n = G.n_vertices
    if n > REALIZE_MAX_N:
        raise ResourceLimit(f"l1_realize limited to n <= {REALIZE_MAX_N}")
    M = shortest_path_metric(G)
    if n == 1:
        pts = PointSet(1, np.zeros((1, 1)))
        return Realization(pts, 1.0, None, [], np.zeros(0))
    if cuts is None:
        cuts = all_cuts(n) if n <= ALL_CUTS_MAX_N else connected_cuts(G)
    iu, ju = np.triu_indices(n, 1)
    d = M.dist[iu, ju]
    member = np.array([[(c >> v) & 1 for v in range(n)] for c in cuts], dtype=float)
    sep = (member[:, iu] != member[:, ju]).astype(float).T  # pairs x cuts
    m = len(cuts)
    # variables: cut weights w (m), then t
    c = np.zeros(m + 1)
    c[-1] = 1.0
    A_lower = np.hstack([-sep, np.zeros((len(d), 1))])
    A_upper = np.hstack([sep, -d[:, None]])
    res = linprog(c, A_ub=np.vstack([A_lower, A_upper]),
                  b_ub=np.concatenate([-d, np.zeros(len(d))]),
                  bounds=[(0, None)] * (m + 1), method="highs")
    if res.status != 0:
        raise RealizationFailed(f"cut LP failed: {res.message}")
    w = res.x[:m]
    keep = w > 1e-12
    coords = (member[keep] * w[keep, None]).T
    pts = PointSet(1, coords)
    report = distortion_report(M, pts, q=1.0)
    if report.distortion > max_distortion:
        raise RealizationFailed(
            f"best distortion {report.distortion:.6g} exceeds {max_distortion}",
            report.distortion)
    return Realization(pts, report.distortion, report,
                       [cut for cut, k in zip(cuts, keep) if k], w[keep])
