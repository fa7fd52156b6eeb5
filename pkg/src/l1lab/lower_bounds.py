"""Numerical certificates for the linear-distortion and Laakso lower bounds.

Each certifier runs the inequality chain on a concrete map and reports the
achieved quantity next to the bound it must respect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from .errors import InvalidParameter, PreconditionViolation, ShapeError
from .graphs import WeightedGraph, laakso, shortest_path_metric
from .metric import (
    DistortionReport,
    FiniteMetricSpace,
    PointSet,
    distortion_report,
    lp_norm,
    pairwise_lp,
)
from .stable import derive_seed

CERT_TOL = 1e-9


@dataclass(frozen=True)
class LinearMap:
    matrix: np.ndarray
    p: float
    target_p: float = 2.0

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        if A.ndim != 2 or min(A.shape) < 1:
            raise ShapeError(f"matrix must be m x d with m, d >= 1, got {A.shape}")
        if not np.all(np.isfinite(A)):
            raise InvalidParameter("matrix has non-finite entries")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    def __call__(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.matrix.T

    def to_dict(self) -> dict:
        return {"matrix": self.matrix.tolist(), "p": self.p, "target_p": self.target_p}


@dataclass(frozen=True)
class CertificateResult:
    bound: float
    achieved: float
    witness: dict
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"bound": self.bound, "achieved": self.achieved, "witness": self.witness,
                "passed": bool(self.passed), "details": self.details}


def _check_p_12(p):
    if not 1 < p <= 2:
        raise InvalidParameter(f"p must lie in (1, 2], got {p}")


def short_diagonal_check(u, v, a, b, p: float):
    """RHS - LHS of the short-diagonal inequality in l_p, 1 < p <= 2:

        ||u-v||^2 + (p-1)||a-b||^2 <= ||u-a||^2 + ||a-v||^2 + ||v-b||^2 + ||b-u||^2.

    Inputs may carry leading batch dimensions; norms act on the last axis.
    """
    _check_p_12(p)
    u, v, a, b = (np.asarray(x, dtype=float) for x in (u, v, a, b))
    if not (u.shape == v.shape == a.shape == b.shape):
        raise ShapeError("all four points must have the same shape")
    sq = lambda x, y: lp_norm(x - y, p) ** 2  # noqa: E731
    lhs = sq(u, v) + (p - 1) * sq(a, b)
    rhs = sq(u, a) + sq(a, v) + sq(v, b) + sq(b, u)
    return rhs - lhs


def short_diagonal_relative(u, v, a, b, p: float):
    """Residual divided by the right-hand side (0 where all points coincide)."""
    res = short_diagonal_check(u, v, a, b, p)
    u, v, a, b = (np.asarray(x, dtype=float) for x in (u, v, a, b))
    sq = lambda x, y: lp_norm(x - y, p) ** 2  # noqa: E731
    scale = sq(u, a) + sq(a, v) + sq(v, b) + sq(b, u)
    return np.divide(res, scale, out=np.zeros_like(np.asarray(res, dtype=float)),
                     where=np.asarray(scale) > 0)


def laakso_lp_lowerbound(i: int, p: float) -> float:
    """sqrt(1 + (p-1) i / 4): distortion lower bound for G_i into L_p."""
    if i < 0:
        raise InvalidParameter("level must be nonnegative")
    _check_p_12(p)
    return math.sqrt(1 + (p - 1) * i / 4)


# half-pairs of a gadget (u, p, a, b, q, v), each as the two gadget edges it spans
_HALF_PATHS = {
    ("u", "a"): (("u", "p"), ("p", "a")),
    ("a", "v"): (("a", "q"), ("q", "v")),
    ("v", "b"): (("b", "q"), ("q", "v")),
    ("b", "u"): (("u", "p"), ("p", "b")),
}


def certify_laakso_embedding(G, image: PointSet, normalize: bool = True) -> CertificateResult:
    """Replay the Laakso induction on a concrete map into l_p.

    ``G`` is a Laakso graph (or its level); row k of ``image`` is the image
    of vertex k. After scaling the map to co-Lipschitz constant 1, start
    from the endpoints, and at each level move to the gadget on the current
    edge: take the largest of the four half-diagonals, then the larger of
    its two edges. The final edge's expansion is the achieved value.
    With ``normalize=False`` a contracting map raises PreconditionViolation.
    """
    if not isinstance(G, WeightedGraph):
        G = laakso(int(G))
    if G.meta.get("family") != "laakso":
        raise InvalidParameter("certifier needs a graph produced by laakso()")
    p = image.p
    _check_p_12(p)
    if image.n != G.n_vertices:
        raise ShapeError(f"image has {image.n} rows for {G.n_vertices} vertices")
    i = G.meta["level"]
    D = shortest_path_metric(G).dist
    F = pairwise_lp(image.coords, p)
    iu = np.triu_indices(G.n_vertices, 1)
    ratios = F[iu] / D[iu]
    k = int(np.argmin(ratios))
    colip = float(ratios[k])
    worst = (G.labels[iu[0][k]], G.labels[iu[1][k]])
    if colip <= 0:
        raise PreconditionViolation(f"map collapses pair {worst}", {"pair": list(worst)})
    if normalize:
        F = F / colip
    elif colip < 1 - CERT_TOL:
        raise PreconditionViolation(
            f"map contracts pair {worst} by factor {colip:.6g}",
            {"pair": list(worst), "ratio": colip})

    ratio = lambda x, y: F[x, y] / D[x, y]  # noqa: E731
    u, v = G.meta["endpoints"]
    trace = [{"level": 0, "pair": [G.labels[u], G.labels[v]], "ratio": ratio(u, v),
              "required": 1.0}]
    for j, record in enumerate(G.meta["levels"], start=1):
        gp, ga, gb, gq = record[(u, v)]
        local = {"u": u, "p": gp, "a": ga, "b": gb, "q": gq, "v": v}
        half = max(_HALF_PATHS, key=lambda h: ratio(local[h[0]], local[h[1]]))
        e1, e2 = _HALF_PATHS[half]
        edge = max((e1, e2), key=lambda e: ratio(local[e[0]], local[e[1]]))
        u, v = local[edge[0]], local[edge[1]]
        trace.append({"level": j,
                      "half_pair": [G.labels[local[half[0]]], G.labels[local[half[1]]]],
                      "half_ratio": ratio(local[half[0]], local[half[1]]),
                      "diagonal_ratio": ratio(ga, gb),
                      "pair": [G.labels[u], G.labels[v]],
                      "ratio": ratio(u, v),
                      "required": math.sqrt(1 + (p - 1) * j / 4)})
    bound = laakso_lp_lowerbound(i, p)
    achieved = trace[-1]["ratio"]
    return CertificateResult(
        bound=bound,
        achieved=achieved,
        witness={"pair": trace[-1]["pair"], "edge_length": float(D[u, v])},
        passed=achieved >= bound - CERT_TOL,
        details={"colipschitz_scale": colip, "normalized": normalize, "p": p,
                 "level": i, "trace": trace},
    )


def walsh_bound(k: int, p: float) -> float:
    """((n-1)/2)^|1/p - 1/2| for the 2^(k+1)+1 point Walsh set."""
    return (2.0 ** k) ** abs(1.0 / p - 0.5)


def _walsh_rows(A: PointSet) -> tuple[int, np.ndarray]:
    m = A.d
    k = int(round(math.log2(m)))
    if 2 ** k != m or A.n != 2 * m + 1:
        raise ShapeError("point set is not a Walsh set (expected 2^(k+1)+1 points in dim 2^k)")
    return k, A.coords[1:m + 1]


def walsh_certificate_residual(T: LinearMap, A: PointSet) -> float:
    """|sum_i ||T w_i||^2 - 2^k sum_j ||T e_j||^2| / (2^k sum_j ||T e_j||^2)."""
    k, W = _walsh_rows(A)
    if T.matrix.shape[1] != A.d:
        raise ShapeError(f"map source dimension {T.matrix.shape[1]} != {A.d}")
    lhs = float(np.sum(T(W) ** 2))
    basis = float(np.sum(T.matrix ** 2))
    rhs = 2 ** k * basis
    return abs(lhs - rhs) / rhs


def walsh_linear_distortion(T: LinearMap, A: PointSet, p: float | None = None):
    """Distortion of the linear map on A (l_p source, l_2 target) and the
    Parseval certificate residual."""
    p = A.p if p is None else p
    residual = walsh_certificate_residual(T, A)
    src = pairwise_lp(A.coords, p)
    img = pairwise_lp(T(A.coords), 2)
    return distortion_report(src, img, q=1.0), residual


def _pair_differences(X: np.ndarray) -> np.ndarray:
    i, j = np.triu_indices(len(X), 1)
    return X[i] - X[j]


def _soft_objective(flat, deltas, s_log, tau, m, d):
    T = flat.reshape(m, d)
    Y = deltas @ T.T
    nrm2 = np.einsum("ij,ij->i", Y, Y)
    nrm2 = np.maximum(nrm2, 1e-300)
    ell = 0.5 * np.log(nrm2) - s_log
    hi = tau * logsumexp(ell / tau)
    lo = tau * logsumexp(-ell / tau)
    w = np.exp(ell / tau - hi / tau) - np.exp(-ell / tau - lo / tau)
    grad = ((w / nrm2)[:, None] * Y).T @ deltas
    return hi + lo, grad.ravel()


def heuristic_best_linear(A: PointSet, p: float | None = None, iterations: int = 400,
                          restarts: int = 20, seed: int = 0, stages: int = 8):
    """Search for a low-distortion linear map of A into l_2.

    Minimizes tau*LSE(log ratio / tau) + tau*LSE(-log ratio / tau), a
    smoothing of log Lipschitz - log co-Lipschitz, with L-BFGS while tau is
    annealed geometrically from 1 to 1e-3. Restart 0 starts at the identity,
    the others at Gaussian matrices. Every iterate's exact distortion is
    re-evaluated and the best map over all restarts is returned.
    """
    p = A.p if p is None else p
    X = A.coords
    d = A.d
    m = d
    deltas = _pair_differences(X)
    s = lp_norm(deltas, p)
    keep = s > 0
    deltas, s_log = deltas[keep], np.log(s[keep])
    taus = np.geomspace(1.0, 1e-3, stages)
    per_stage = max(1, iterations // stages)

    def exact(T):
        r = np.sqrt(np.einsum("ij,ij->i", deltas @ T.T, deltas @ T.T)) / np.exp(s_log)
        return r.max() / r.min() if r.min() > 0 else math.inf

    best = (math.inf, -1, None)
    for r in range(restarts):
        rng = np.random.default_rng(derive_seed(seed, r))
        T = np.eye(m, d) if r == 0 else rng.standard_normal((m, d))
        cand = (exact(T), r, T)
        for tau in taus:
            res = optimize.minimize(_soft_objective, T.ravel(),
                                    args=(deltas, s_log, tau, m, d), jac=True,
                                    method="L-BFGS-B", options={"maxiter": per_stage})
            T = res.x.reshape(m, d)
            T = T / np.linalg.norm(T)
            val = exact(T)
            if val < cand[0]:
                cand = (val, r, T)
        if (cand[0], cand[1]) < (best[0], best[1]):
            best = cand
    L = LinearMap(best[2], p)
    report, _ = walsh_linear_distortion(L, A, p) if _is_walsh(A) else (
        distortion_report(pairwise_lp(X, p), pairwise_lp(L(X), 2), q=1.0), None)
    return L, report


def _is_walsh(A: PointSet) -> bool:
    m = A.d
    return m >= 1 and 2 ** int(round(math.log2(m))) == m and A.n == 2 * m + 1


def hypercube_concentration_check(coords, alpha: float) -> CertificateResult:
    """Tail P(|f - E f| >= k/(4 alpha)) of a 1-Lipschitz f on {0,1}^k under
    the uniform measure, against 2 exp(-k / (32 alpha^2)).

    ``coords[x]`` is f at the vertex whose binary expansion is x. Passes iff
    the tail is at most the bound.
    """
    f = np.asarray(coords, dtype=float).ravel()
    N = len(f)
    k = int(round(math.log2(N))) if N else -1
    if N == 0 or 2 ** k != N:
        raise ShapeError(f"expected 2^k values, got {N}")
    if not alpha > 0:
        raise InvalidParameter("alpha must be positive")
    idx = np.arange(N)
    for bit in range(k):
        nb = idx ^ (1 << bit)
        gap = np.abs(f - f[nb])
        bad = np.flatnonzero(gap > 1 + 1e-12)
        if len(bad):
            x = int(bad[0])
            raise PreconditionViolation(
                f"f is not 1-Lipschitz on edge ({x}, {x ^ (1 << bit)}): jump {gap[x]:.6g}",
                {"edge": [x, x ^ (1 << bit)], "jump": float(gap[x])})
    mean = f.mean()
    threshold = k / (4 * alpha)
    dev = np.abs(f - mean)
    tail = float(np.mean(dev >= threshold - 1e-12 * max(1.0, threshold)))
    bound = 2 * math.exp(-k / (32 * alpha ** 2))
    far = int(np.argmax(dev))
    return CertificateResult(bound=bound, achieved=tail,
                             witness={"vertex": far, "deviation": float(dev[far])},
                             passed=tail <= bound,
                             details={"k": k, "alpha": alpha, "threshold": threshold,
                                      "mean": float(mean)})


def stress_embedding(M: FiniteMetricSpace, dim: int | None = None, iterations: int = 500,
                     seed: int = 0) -> PointSet:
    """Euclidean embedding by stress majorization (SMACOF) from a classical MDS start."""
    D = M.dist
    n = M.n
    dim = min(n - 1, 8) if dim is None else dim
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (D ** 2) @ J
    vals, vecs = np.linalg.eigh(B)
    top = np.argsort(vals)[::-1][:dim]
    X = vecs[:, top] * np.sqrt(np.maximum(vals[top], 0))
    rng = np.random.default_rng(seed)
    X = X + 1e-6 * rng.standard_normal(X.shape)
    for _ in range(iterations):
        E = pairwise_lp(X, 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            Bm = np.where(E > 0, -D / E, 0.0)
        Bm[np.diag_indices(n)] = -Bm.sum(axis=1)
        X = Bm @ X / n
    return PointSet(2, X)
