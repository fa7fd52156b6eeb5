import numpy as np
import pytest

from l1lab.metric import FiniteMetricSpace


def floyd_warshall(n, edges):
    """Independent all-pairs oracle (no scipy)."""
    D = np.full((n, n), np.inf)
    np.fill_diagonal(D, 0.0)
    for u, v, w in edges:
        D[u, v] = D[v, u] = min(D[u, v], float(w))
    for k in range(n):
        D = np.minimum(D, D[:, [k]] + D[[k], :])
    return D


def random_metric(n, seed, kind="euclid"):
    rng = np.random.default_rng(seed)
    if kind == "euclid":
        X = rng.standard_normal((n, 3))
        D = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    else:
        # shortest paths of a random complete weighted graph
        W = rng.uniform(0.5, 3.0, (n, n))
        W = np.triu(W, 1)
        W = W + W.T
        D = floyd_warshall(n, [(i, j, W[i, j]) for i in range(n) for j in range(i + 1, n)])
    return FiniteMetricSpace(list(range(n)), D)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
