"""Snowflake embeddings of finite metrics into l_2.

Per scale rho = 2^(n/(1-eps)), random ball-carving partitions with clusters
of diameter <= rho give each point a padding pad(x, P) = min(rho,
d(x, X minus C_x)). The scale map signs the padding by a random +-1 per
cluster, and the scales are stacked on orthogonal blocks with weights
2^(-n eps/(1-eps)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import IncompleteScales, InvalidParameter
from .metric import (
    DistortionReport,
    FiniteMetricSpace,
    PointSet,
    distortion_report,
    snowflake,
)
from .stable import derive_seed

SCHEMES = ("ckr-general", "singleton-fallback")
ENVELOPE_SLACK = 1.25
TRUNCATION_TARGET = 0.05
MAX_ENUMERATED_CLUSTERS = 12


@dataclass(frozen=True)
class Partition:
    cluster_of: np.ndarray
    clusters: list
    rho: float

    @classmethod
    def from_assignment(cls, assignment, rho) -> Partition:
        _, cluster_of = np.unique(np.asarray(assignment), return_inverse=True)
        clusters = [np.flatnonzero(cluster_of == c) for c in range(cluster_of.max() + 1)]
        return cls(cluster_of, clusters, float(rho))

    @property
    def size(self) -> int:
        return len(self.clusters)


@dataclass(frozen=True)
class DecompositionScheme:
    """``ckr-general``: radius uniform in [rho/4, rho/2], uniformly random
    center order, each point joins the first center within the radius.
    ``singleton-fallback``: every point is its own cluster."""

    kind: str = "ckr-general"

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise InvalidParameter(f"unknown scheme {self.kind!r}")

    def sample(self, D: np.ndarray, rho: float, rng: np.random.Generator) -> Partition:
        n = len(D)
        if self.kind == "singleton-fallback":
            return Partition.from_assignment(np.arange(n), rho)
        R = rng.uniform(rho / 4, rho / 2)
        order = rng.permutation(n)
        within = D[order] <= R
        first = np.argmax(within, axis=0)
        return Partition.from_assignment(order[first], rho)


def _scheme(scheme) -> DecompositionScheme:
    return scheme if isinstance(scheme, DecompositionScheme) else DecompositionScheme(scheme)


def _dist(M) -> np.ndarray:
    return M.dist if isinstance(M, FiniteMetricSpace) else np.asarray(M, dtype=float)


def padded_partition(M: FiniteMetricSpace, rho: float, scheme="ckr-general",
                     seed=None) -> Partition:
    if not rho > 0:
        raise InvalidParameter(f"rho must be positive, got {rho}")
    return _scheme(scheme).sample(_dist(M), rho, np.random.default_rng(seed))


def pad(M, P: Partition) -> np.ndarray:
    """min(rho, d(x, X minus C_x)) for every x; rho when C_x is everything."""
    D = _dist(M)
    same = P.cluster_of[:, None] == P.cluster_of[None, :]
    outside = np.where(same, np.inf, D)
    return np.minimum(P.rho, outside.min(axis=1))


@dataclass(frozen=True)
class PaddingEstimate:
    mean_pad: np.ndarray
    delta_hat: float
    rho: float
    trials: int


def measure_padding(M, rho: float, scheme="ckr-general", trials: int = 1000,
                    seed=0) -> PaddingEstimate:
    """Monte Carlo mean padding per point; delta_hat = min_x mean pad / rho."""
    if not rho > 0:
        raise InvalidParameter(f"rho must be positive, got {rho}")
    sch = _scheme(scheme)
    D = _dist(M)
    rng = np.random.default_rng(seed)
    total = np.zeros(len(D))
    for _ in range(trials):
        total += pad(D, sch.sample(D, rho, rng))
    mean = total / trials
    return PaddingEstimate(mean, float(mean.min() / rho), float(rho), int(trials))


def scale_radius(n: int, eps: float) -> float:
    return 2.0 ** (n / (1.0 - eps))


@dataclass(frozen=True)
class ScaleMap:
    n: int
    eps: float
    rho: float
    partitions: list
    pads: np.ndarray  # partitions x points
    signs: list  # per partition, k x |P| array of +-1
    coords: np.ndarray

    @property
    def delta_hat(self) -> float:
        """min_x (mean pad over this map's partitions) / rho."""
        return float(self.pads.mean(axis=0).min() / self.rho)


def all_signs(m: int) -> np.ndarray:
    return np.array(list(product((1.0, -1.0), repeat=m)))


def scale_map(M, n: int, eps: float, M_partitions: int = 16, k_signs: int = 64,
              scheme="ckr-general", seed=0, enumerate_signs: bool = False) -> ScaleMap:
    """Map for scale index ``n``: coordinate (P, s) of x is
    s[C_x] * pad(x, P) / sqrt(k * M_partitions).

    With ``enumerate_signs`` every sign vector in {-1, 1}^|P| is used
    (k = 2^|P|), which reproduces the exact sign expectation.
    """
    if not 0 < eps < 1:
        raise InvalidParameter(f"eps must lie in (0, 1), got {eps}")
    if M_partitions < 1 or k_signs < 1:
        raise InvalidParameter("need at least one partition and one sign vector")
    D = _dist(M)
    rho = scale_radius(n, eps)
    sch = _scheme(scheme)
    rng = np.random.default_rng(seed)
    partitions, pads, signs, blocks = [], [], [], []
    for _ in range(M_partitions):
        P = sch.sample(D, rho, rng)
        pd_ = pad(D, P)
        if enumerate_signs:
            if P.size > MAX_ENUMERATED_CLUSTERS:
                raise InvalidParameter(f"sign enumeration limited to {MAX_ENUMERATED_CLUSTERS} clusters")
            S = all_signs(P.size)
        else:
            S = rng.choice((-1.0, 1.0), size=(k_signs, P.size))
        partitions.append(P)
        pads.append(pd_)
        signs.append(S)
        blocks.append(S[:, P.cluster_of].T * pd_[:, None] / math.sqrt(len(S) * M_partitions))
    return ScaleMap(n, eps, rho, partitions, np.array(pads), signs, np.hstack(blocks))


def scale_weight(n: int, eps: float) -> float:
    return 2.0 ** (-n * eps / (1.0 - eps))


def required_scales(M, eps: float) -> tuple[int, int]:
    """Scale indices n with 2^n in [min d^(1-eps) / 2, 2 diam^(1-eps)]."""
    D = _dist(M)
    iu = np.triu_indices(len(D), 1)
    d = D[iu] ** (1.0 - eps)
    lo = math.floor(math.log2(d.min() / 2))
    hi = math.ceil(math.log2(2 * d.max()))
    return lo, hi


@dataclass(frozen=True)
class MultiScaleEmbedding:
    eps: float
    n_min: int
    n_max: int
    scale_maps: dict
    coords: np.ndarray
    weights: dict = field(default_factory=dict)


def assouad_combine(M, eps: float, scale_maps) -> MultiScaleEmbedding:
    """Concatenate the scale maps on disjoint blocks weighted by 2^(-n eps/(1-eps))."""
    maps = {sm.n: sm for sm in (scale_maps.values() if isinstance(scale_maps, dict) else scale_maps)}
    lo, hi = required_scales(M, eps)
    missing = [n for n in range(lo, hi + 1) if n not in maps]
    if missing:
        raise IncompleteScales(f"scale maps missing for n in {missing}", missing)
    order = sorted(maps)
    weights = {n: scale_weight(n, eps) for n in order}
    coords = np.hstack([weights[n] * maps[n].coords for n in order])
    return MultiScaleEmbedding(eps, order[0], order[-1], {n: maps[n] for n in order},
                               coords, weights)


def truncation_bound(M, emb: MultiScaleEmbedding, scheme="ckr-general") -> float:
    """Bound on the squared contribution of the omitted scales, relative to
    each pair's squared image distance (max over pairs).

    Below n_min the Claim envelope gives at most 4 * 4^n per scale. Above
    n_max, ball carving with rho/4 >= diam yields a single cluster and the
    scale map is constant, so those scales contribute exactly zero;
    otherwise the envelope 4 d^2 2^(-2 n eps/(1-eps)) is summed.
    """
    D = _dist(M)
    eps = emb.eps
    iu = np.triu_indices(len(D), 1)
    d = D[iu]
    img2 = pdist(emb.coords, "sqeuclidean")
    lower = 4.0 * 4.0 ** emb.n_min / 3.0
    r = 2.0 ** (-2 * eps / (1 - eps))
    if _scheme(scheme).kind == "ckr-general" and scale_radius(emb.n_max + 1, eps) / 4 >= D.max():
        upper = np.zeros_like(d)
    else:
        upper = 4 * d ** 2 * scale_weight(emb.n_max + 1, eps) ** 2 / (1 - r)
    return float(np.max((lower + upper) / img2))


@dataclass(frozen=True)
class Envelope:
    n: int
    pair: tuple
    distance: float
    bound: float


def envelope_violations(M, emb: MultiScaleEmbedding, slack: float = ENVELOPE_SLACK) -> list:
    """Pairs/scales where ||phi_n(x) - phi_n(y)|| > slack * 2 min(d, rho_n)."""
    D = _dist(M)
    out = []
    for n, sm in emb.scale_maps.items():
        img = squareform(pdist(sm.coords))
        bound = 2 * np.minimum(D, sm.rho)
        for i, j in np.argwhere(np.triu(img > slack * bound * (1 + 1e-12), 1)):
            out.append(Envelope(n, (int(i), int(j)), float(img[i, j]), float(bound[i, j])))
    return out


@dataclass(frozen=True)
class SnowflakeParams:
    M_partitions: int = 16
    k_signs: int = 64
    scheme: str = "ckr-general"
    extra_scales: int = 1
    truncation_target: float = TRUNCATION_TARGET
    max_extra_low: int = 8


@dataclass(frozen=True)
class SnowflakeEmbedding:
    image: PointSet
    report: DistortionReport
    embedding: MultiScaleEmbedding
    delta_hat: float
    c_fit: float
    truncation_error: float
    envelope_violations: list

    def summary(self) -> dict:
        return {**self.report.to_dict(),
                "eps": self.embedding.eps,
                "n_min": self.embedding.n_min,
                "n_max": self.embedding.n_max,
                "dimension": int(self.image.d),
                "delta_hat": self.delta_hat,
                "c_fit": self.c_fit,
                "truncation_error": self.truncation_error,
                "envelope_violations": [vars(v) | {"pair": list(v.pair)}
                                        for v in self.envelope_violations]}


def snowflake_embed(M: FiniteMetricSpace, eps: float, params: SnowflakeParams | None = None,
                    seed: int = 0) -> SnowflakeEmbedding:
    """Embed (X, d^(1-eps)) into l_2 and report against the snowflaked metric.

    Scale n uses seed (seed, n) so adding scales never changes existing ones.
    """
    if not 0 < eps < 1:
        raise InvalidParameter(f"eps must lie in (0, 1), got {eps}")
    params = params or SnowflakeParams()
    D = M.dist
    lo, hi = required_scales(M, eps)
    lo -= params.extra_scales
    hi += params.extra_scales
    if params.scheme == "ckr-general":
        while scale_radius(hi + 1, eps) / 4 < D.max():
            hi += 1

    def build(n):
        return scale_map(M, n, eps, params.M_partitions, params.k_signs, params.scheme,
                         derive_seed(seed, n + 2 ** 20))

    maps = {n: build(n) for n in range(lo, hi + 1)}
    emb = assouad_combine(M, eps, maps)
    trunc = truncation_bound(M, emb, params.scheme)
    for _ in range(params.max_extra_low):
        if trunc <= params.truncation_target:
            break
        lo -= 1
        maps[lo] = build(lo)
        emb = assouad_combine(M, eps, maps)
        trunc = truncation_bound(M, emb, params.scheme)

    image = PointSet(2, emb.coords)
    target = snowflake(M, eps)
    report = distortion_report(target, image)
    ratios = pdist(emb.coords) / target.dist[np.triu_indices(M.n, 1)]
    c_fit = float(eps * np.max(ratios) ** 2)
    delta_hat = min(sm.delta_hat for sm in emb.scale_maps.values())
    return SnowflakeEmbedding(image, report, emb, delta_hat, c_fit, trunc,
                              envelope_violations(M, emb))


def laakso_snowflake_lowerbound(i: int, eps: float, clamp: bool = True) -> float:
    """Distortion lower bound for the (1-eps)-snowflake of Laakso G_i.

    Iterates L_0 = 1, L_j = L_{j-1} / 4^eps + 1/4 and returns sqrt(L_i),
    clamped below at 1 unless ``clamp`` is False.
    """
    if i < 0:
        raise InvalidParameter("level must be nonnegative")
    if not 0 <= eps < 1:
        raise InvalidParameter(f"eps must lie in [0, 1), got {eps}")
    L = 1.0
    shrink = 4.0 ** -eps
    for _ in range(i):
        L = L * shrink + 0.25
    root = math.sqrt(L)
    return max(1.0, root) if clamp else root
