"""Finite metric spaces, point sets, distortion and doubling constants."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    DegenerateInput,
    InvalidMetric,
    InvalidParameter,
    ResourceLimit,
    ShapeError,
)
from .setcover import greedy_cover, min_cover_size, prune_sets

TRIANGLE_RTOL = 1e-9
EXACT_DOUBLING_MAX_N = 64


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Labeled points with an explicit distance matrix.

    Construction only checks shapes; use :func:`validate_metric` to check the
    metric axioms.
    """

    labels: list
    dist: np.ndarray

    def __post_init__(self):
        dist = np.array(self.dist, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise ShapeError(f"distance matrix must be square, got {dist.shape}")
        labels = list(self.labels) if self.labels is not None else list(range(len(dist)))
        if len(labels) != dist.shape[0]:
            raise ShapeError(f"{len(labels)} labels for {dist.shape[0]} points")
        dist.setflags(write=False)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_matrix(cls, dist, labels=None) -> FiniteMetricSpace:
        dist = np.asarray(dist, dtype=float)
        return cls(list(range(len(dist))) if labels is None else list(labels), dist)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def min_distance(self) -> float:
        if self.n < 2:
            return 0.0
        iu = np.triu_indices(self.n, 1)
        return float(self.dist[iu].min())

    def relabel(self, perm) -> FiniteMetricSpace:
        """Return the same space with points reordered by ``perm``."""
        perm = np.asarray(perm)
        return FiniteMetricSpace([self.labels[i] for i in perm],
                                 self.dist[np.ix_(perm, perm)])

    def to_dict(self) -> dict:
        return {"labels": [_jsonable(x) for x in self.labels],
                "dist": self.dist.tolist()}


@dataclass(frozen=True)
class PointSet:
    """Rows of ``coords`` are points of l_p^d."""

    p: float
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float)
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1)
        if coords.ndim != 2 or coords.shape[0] < 1 or coords.shape[1] < 1:
            raise ShapeError(f"coords must be a nonempty n x d matrix, got {coords.shape}")
        p = float(self.p)
        if not p > 0:
            raise InvalidParameter(f"exponent must be positive, got {p}")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class DistortionReport:
    lipschitz: float
    colipschitz: float
    distortion: float
    avg_expansion: float
    q: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Violation:
    kind: str  # "triangle" | "symmetry" | "diagonal" | "nonpositive" | "nonfinite"
    indices: tuple
    residual: float


def lp_norm(v, p, axis=-1):
    """l_p norm along ``axis``; ``p`` may be ``inf``. For p < 1 this is the quasi-norm."""
    v = np.abs(np.asarray(v, dtype=float))
    if math.isinf(p):
        return v.max(axis=axis)
    if p == 1:
        return v.sum(axis=axis)
    if p == 2:
        return np.sqrt((v * v).sum(axis=axis))
    return (v ** p).sum(axis=axis) ** (1.0 / p)


def metric_from_points(ps: PointSet) -> FiniteMetricSpace:
    """Pairwise l_p distances between the rows of ``ps``."""
    if ps.p < 1:
        raise InvalidParameter(f"l_p distance is a metric only for p >= 1, got {ps.p}")
    X = ps.coords
    if math.isinf(ps.p):
        D = cdist(X, X, "chebyshev")
    elif ps.p == 1:
        D = cdist(X, X, "cityblock")
    elif ps.p == 2:
        D = cdist(X, X, "euclidean")
    else:
        D = cdist(X, X, "minkowski", p=ps.p)
    off = D + np.eye(len(D))
    hits = np.argwhere(np.triu(off == 0, 1))
    if len(hits):
        i, j = map(int, hits[0])
        raise DegenerateInput(f"rows {i} and {j} coincide", (i, j))
    return FiniteMetricSpace(list(range(ps.n)), D)


def pairwise_lp(coords, p) -> np.ndarray:
    """Pairwise l_p distance matrix without the distinctness requirement."""
    X = np.asarray(coords, dtype=float)
    if math.isinf(p):
        return cdist(X, X, "chebyshev")
    return cdist(X, X, "minkowski", p=p)


def validate_metric(M: FiniteMetricSpace, rtol: float = TRIANGLE_RTOL) -> list[Violation]:
    """All violations of the metric axioms in ``M``; empty iff it is a metric.

    Triangle inequalities are checked on the upper triangle only, so an
    asymmetric entry is reported once as a symmetry violation.
    """
    D = M.dist
    n = M.n
    out: list[Violation] = []
    if not np.all(np.isfinite(D)):
        for i, j in np.argwhere(~np.isfinite(D)):
            out.append(Violation("nonfinite", (int(i), int(j)), float("inf")))
        return out
    for i in range(n):
        if D[i, i] != 0:
            out.append(Violation("diagonal", (i,), float(abs(D[i, i]))))
    for i, j in np.argwhere(np.triu(D != D.T, 1)):
        out.append(Violation("symmetry", (int(i), int(j)), float(abs(D[i, j] - D[j, i]))))
    for i, j in np.argwhere(np.triu(D <= 0, 1)):
        out.append(Violation("nonpositive", (int(i), int(j)), float(D[i, j])))
    U = np.triu(D, 1)
    S = U + U.T
    for j in range(n):
        through = S[:, j][:, None] + S[j, :][None, :]
        excess = S - through
        bad = excess > rtol * np.maximum(S, through)
        bad[j, :] = False
        bad[:, j] = False
        bad = np.triu(bad, 1)
        for i, k in np.argwhere(bad):
            out.append(Violation("triangle", (int(i), j, int(k)), float(excess[i, k])))
    return out


def require_metric(M: FiniteMetricSpace) -> None:
    violations = validate_metric(M)
    if violations:
        raise InvalidMetric(f"{len(violations)} metric violations, first: {violations[0]}",
                            violations)


def snowflake(M: FiniteMetricSpace, eps: float) -> FiniteMetricSpace:
    """The metric d^(1-eps)."""
    if not 0 <= eps < 1:
        raise InvalidParameter(f"eps must lie in [0, 1), got {eps}")
    if eps == 0:
        return M
    return FiniteMetricSpace(M.labels, M.dist ** (1.0 - eps))


def _as_dist(X) -> np.ndarray:
    if isinstance(X, FiniteMetricSpace):
        return X.dist
    if isinstance(X, PointSet):
        return pairwise_lp(X.coords, X.p)
    return np.asarray(X, dtype=float)


def pair_ratios(src, img) -> np.ndarray:
    """Image/source distance ratio over all unordered pairs i < j."""
    S, T = _as_dist(src), _as_dist(img)
    if S.shape != T.shape:
        raise ShapeError(f"point counts differ: {S.shape[0]} vs {T.shape[0]}")
    iu = np.triu_indices(S.shape[0], 1)
    s = S[iu]
    if np.any(s <= 0):
        raise InvalidParameter("source has zero distance between distinct points")
    return T[iu] / s


def distortion_report(src, img, q: float = 0.5) -> DistortionReport:
    """Lipschitz, co-Lipschitz, distortion and mean of ratio**q over pairs.

    ``src`` and ``img`` may be metric spaces, point sets or raw distance
    matrices over the same index set.
    """
    if not 0 < q <= 1:
        raise InvalidParameter(f"q must lie in (0, 1], got {q}")
    r = pair_ratios(src, img)
    if r.size == 0:
        raise ShapeError("need at least two points")
    lip, colip = float(r.max()), float(r.min())
    dist = lip / colip if colip > 0 else math.inf
    return DistortionReport(lip, colip, dist, float(np.mean(r ** q)), float(q))


def _cover_sets(D: np.ndarray, x: int, r: float):
    tol = 1e-12 * max(r, 1.0)
    ball = np.flatnonzero(D[x] <= r + tol)
    universe = 0
    for y in ball:
        universe |= 1 << int(y)
    half = D[:, ball] <= r / 2 + tol
    sets = []
    for z in range(len(D)):
        s = 0
        for y in ball[half[z]]:
            s |= 1 << int(y)
        sets.append(s)
    return universe, prune_sets(universe, sets)


def doubling_constant(M: FiniteMetricSpace, mode: str = "exact") -> int:
    """Max over balls B(x, r), r a realized distance from x, of the number of
    radius-r/2 balls (centers anywhere in X) needed to cover B(x, r).

    ``mode="exact"`` solves each cover by branch and bound (n <= 64);
    ``mode="greedy"`` returns the greedy upper bound.
    """
    if mode not in ("exact", "greedy"):
        raise InvalidParameter(f"unknown mode {mode!r}")
    n = M.n
    if mode == "exact" and n > EXACT_DOUBLING_MAX_N:
        raise ResourceLimit(f"exact doubling constant limited to n <= {EXACT_DOUBLING_MAX_N}")
    if n < 2:
        return 1
    D = M.dist
    best = 1
    seen = set()
    for x in range(n):
        for r in np.unique(D[x][D[x] > 0]):
            universe, sets = _cover_sets(D, x, float(r))
            key = (universe, tuple(sets))
            if key in seen or universe.bit_count() <= best:
                continue
            seen.add(key)
            if mode == "greedy":
                c = len(greedy_cover(universe, sets))
            else:
                c = min_cover_size(universe, sets)
            best = max(best, c)
    return best


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, tuple):
        return list(x)
    return x
