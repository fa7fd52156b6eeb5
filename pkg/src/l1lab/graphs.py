"""Instance generators: Laakso and diamond graphs, Hamming cubes, Walsh point
sets and random point sets.

Recursive graphs are built by edge substitution. Every edge carries the
sequence of copy indices (one index 0-5 per level for Laakso, 0-3 for
diamonds) that locates it, and vertex labels are that copy path followed by
the vertex's role inside its gadget. The substitution record is kept in
``WeightedGraph.meta["levels"]`` so lower-bound certificates can recover the
midpoints of an edge structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import DisconnectedGraph, InvalidParameter, ResourceLimit, ShapeError
from .metric import FiniteMetricSpace, PointSet

MAX_LAAKSO_LEVEL = 8
MAX_DIAMOND_LEVEL = 8
MAX_CUBE_DIM = 14
MAX_WALSH_ORDER = 12

# Laakso gadget, replacing an edge (u, v) by six quarter-length edges:
#
#            a
#          /   \
#   u --- p     q --- v
#          \   /
#            b
#
# Copy index c is the position of the edge in this tuple. The pendant
# copies (0 and 5) hang off the cycle's horizontal junctions p and q.
LAAKSO_GADGET = (("u", "p"), ("p", "a"), ("a", "q"), ("p", "b"), ("b", "q"), ("q", "v"))
DIAMOND_GADGET = (("u", "l"), ("l", "v"), ("u", "r"), ("r", "v"))


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with positive edge lengths.

    ``edges`` holds ``(u, v, length)`` triples; lengths may be floats or
    ``Fraction`` (generators use exact dyadic fractions).
    """

    n_vertices: int
    edges: list
    labels: list | None = None
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for u, v, w in self.edges:
            if u == v:
                raise InvalidParameter(f"self-loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ShapeError(f"edge ({u}, {v}) out of range")
            if not w > 0:
                raise InvalidParameter(f"edge ({u}, {v}) has nonpositive length {w}")
        if self.labels is not None and len(self.labels) != self.n_vertices:
            raise ShapeError("labels length does not match vertex count")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex_labels(self) -> list:
        return list(self.labels) if self.labels is not None else list(range(self.n_vertices))

    def index(self, label) -> int:
        return self.vertex_labels().index(label)

    def adjacency_masks(self) -> list[int]:
        adj = [0] * self.n_vertices
        for u, v, _ in self.edges:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return adj

    def to_dict(self) -> dict:
        return {"n": self.n_vertices,
                "edges": [[int(u), int(v), float(w)] for u, v, w in self.edges],
                "labels": self.vertex_labels()}


def _substitute(levels: int, gadget, roles, scale: Fraction, family: str) -> WeightedGraph:
    labels = ["s", "t"]
    edges = [(0, 1, ())]  # (u, v, copy path)
    history = []
    for _ in range(levels):
        new_edges = []
        record = {}
        for u, v, path in edges:
            prefix = "".join(map(str, path))
            local = {"u": u, "v": v}
            for role in roles:
                local[role] = len(labels)
                labels.append(prefix + role)
            record[(u, v)] = tuple(local[r] for r in roles)
            for c, (x, y) in enumerate(gadget):
                new_edges.append((local[x], local[y], path + (c,)))
        history.append(record)
        edges = new_edges
    length = scale ** levels
    graph_edges = [(u, v, length) for u, v, _ in edges]
    meta = {
        "family": family,
        "level": levels,
        "endpoints": (0, 1),
        "levels": history,
        "edge_paths": [path for _, _, path in edges],
    }
    return WeightedGraph(len(labels), graph_edges, labels, meta)


def laakso(i: int) -> WeightedGraph:
    """Laakso graph G_i: 6**i edges of length 4**-i, endpoints ``s``, ``t`` at distance 1.

    ``meta["levels"][j]`` maps each edge (u, v) of the embedded copy of G_j
    to the gadget vertices ``(p, a, b, q)`` inserted on it; ``a`` and ``b``
    are the two midpoints between u and v.
    """
    if i < 0:
        raise InvalidParameter(f"level must be nonnegative, got {i}")
    if i > MAX_LAAKSO_LEVEL:
        raise ResourceLimit(f"laakso level limited to {MAX_LAAKSO_LEVEL}")
    return _substitute(i, LAAKSO_GADGET, ("p", "a", "b", "q"), Fraction(1, 4), "laakso")


def diamond(k: int) -> WeightedGraph:
    """Diamond graph D_k: every edge of D_{k-1} becomes a 4-cycle of half-length edges."""
    if k < 0:
        raise InvalidParameter(f"level must be nonnegative, got {k}")
    if k > MAX_DIAMOND_LEVEL:
        raise ResourceLimit(f"diamond level limited to {MAX_DIAMOND_LEVEL}")
    return _substitute(k, DIAMOND_GADGET, ("l", "r"), Fraction(1, 2), "diamond")


def is_connected(G: WeightedGraph) -> bool:
    if G.n_vertices <= 1:
        return True
    A = _sparse(G)
    ncomp, _ = connected_components(A, directed=False)
    return ncomp == 1


def _sparse(G: WeightedGraph):
    if G.edges:
        u, v, w = zip(*G.edges)
    else:
        u, v, w = (), (), ()
    w = np.array([float(x) for x in w])
    return coo_matrix((w, (u, v)), shape=(G.n_vertices, G.n_vertices)).tocsr()


def shortest_path_metric(G: WeightedGraph) -> FiniteMetricSpace:
    """All-pairs shortest-path metric of a connected graph.

    Dyadic edge lengths keep every path sum exactly representable, so the
    result is exact for the generated families.
    """
    if not is_connected(G):
        raise DisconnectedGraph("graph is not connected")
    D = shortest_path(_sparse(G), method="D", directed=False)
    return FiniteMetricSpace(G.vertex_labels(), D)


def hypercube_metric(k: int) -> FiniteMetricSpace:
    """Hamming metric on {0,1}^k; point i is the binary expansion of i."""
    if k < 0:
        raise InvalidParameter("dimension must be nonnegative")
    if k > MAX_CUBE_DIM:
        raise ResourceLimit(f"hypercube dimension limited to {MAX_CUBE_DIM}")
    idx = np.arange(2 ** k, dtype=np.uint32)
    D = hamming_weight(idx[:, None] ^ idx[None, :]).astype(float)
    labels = [format(i, f"0{k}b") if k else "" for i in range(2 ** k)]
    return FiniteMetricSpace(labels, D)


def hamming_weight(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint32)
    return np.bitwise_count(x) if hasattr(np, "bitwise_count") else \
        np.vectorize(lambda t: int(t).bit_count())(x)


def walsh_matrix(k: int) -> np.ndarray:
    """2**k x 2**k Sylvester-Hadamard matrix with +-1 entries."""
    H = np.ones((1, 1))
    for _ in range(k):
        H = np.block([[H, H], [H, -H]])
    return H


def walsh_pointset(k: int, p: float) -> PointSet:
    """Origin, the 2**k Walsh rows and the 2**k standard basis vectors, in that order."""
    if k < 0:
        raise InvalidParameter("order must be nonnegative")
    if k > MAX_WALSH_ORDER:
        raise ResourceLimit(f"walsh order limited to {MAX_WALSH_ORDER}")
    m = 2 ** k
    coords = np.vstack([np.zeros((1, m)), walsh_matrix(k), np.eye(m)])
    return PointSet(p, coords)


def random_pointset(n: int, d: int, p: float, distribution: str = "gaussian",
                    seed: int = 0) -> PointSet:
    if n < 1 or d < 1:
        raise InvalidParameter("n and d must be at least 1")
    rng = np.random.default_rng(seed)
    draw = {"gaussian": lambda size: rng.standard_normal(size),
            "unit-cube": lambda size: rng.random(size)}.get(distribution)
    if draw is None:
        raise InvalidParameter(f"unknown distribution {distribution!r}")
    X = draw((n, d))
    while True:
        _, first = np.unique(X, axis=0, return_index=True)
        if len(first) == n:
            break
        dup = np.setdiff1d(np.arange(n), first)
        X[dup] = draw((len(dup), d))
    return PointSet(p, X)
