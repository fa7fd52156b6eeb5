import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_metric
from l1lab.errors import DegenerateInput, InvalidMetric, InvalidParameter, ResourceLimit, ShapeError
from l1lab.metric import (
    FiniteMetricSpace,
    PointSet,
    distortion_report,
    doubling_constant,
    metric_from_points,
    require_metric,
    snowflake,
    validate_metric,
)


def brute_doubling(D):
    """Exhaustive oracle: try every subset of centers in increasing size."""
    n = len(D)
    best = 1
    for x in range(n):
        for r in np.unique(D[x][D[x] > 0]):
            ball = [y for y in range(n) if D[x, y] <= r]
            for size in range(1, len(ball) + 1):
                if any(all(any(D[c, y] <= r / 2 for c in cs) for y in ball)
                       for cs in itertools.combinations(range(n), size)):
                    break
            best = max(best, size)
    return best


# -- metric_from_points ------------------------------------------------------

def test_basis_points_l1():
    M = metric_from_points(PointSet(1, np.eye(2)))
    assert M.dist[0, 1] == 2.0


def test_basis_points_l2():
    M = metric_from_points(PointSet(2, np.eye(2)))
    assert M.dist[0, 1] == pytest.approx(math.sqrt(2))


def test_linf_uses_max_coordinate():
    M = metric_from_points(PointSet(math.inf, np.array([[0.0, 0.0], [1.0, -3.0]])))
    assert M.dist[0, 1] == 3.0


def test_single_point():
    M = metric_from_points(PointSet(1, np.array([[1.0, 2.0]])))
    assert M.dist.shape == (1, 1) and M.dist[0, 0] == 0


def test_duplicate_rows_named():
    with pytest.raises(DegenerateInput) as info:
        metric_from_points(PointSet(1, np.array([[0.0], [1.0], [0.0]])))
    assert tuple(info.value.indices) == (0, 2)


def test_pointset_shape_checked():
    with pytest.raises((ShapeError, InvalidParameter)):
        PointSet(1, np.zeros((0, 2)))


# -- validate_metric ---------------------------------------------------------

def path3(d13=2.0):
    return np.array([[0, 1, d13], [1, 0, 1], [d13, 1, 0]], float)


def test_valid_path():
    assert validate_metric(FiniteMetricSpace([0, 1, 2], path3())) == []


def test_triangle_violation_residual():
    v = validate_metric(FiniteMetricSpace([0, 1, 2], path3(5.0)))
    assert len(v) == 1
    assert v[0].kind == "triangle"
    assert v[0].residual == pytest.approx(3.0)


def test_symmetry_violation():
    D = path3()
    D[0, 1] = 1.5
    kinds = [x.kind for x in validate_metric(FiniteMetricSpace([0, 1, 2], D))]
    assert kinds.count("symmetry") == 1


def test_require_metric_raises():
    with pytest.raises(InvalidMetric):
        require_metric(FiniteMetricSpace([0, 1, 2], path3(5.0)))


def test_dist_is_read_only():
    M = FiniteMetricSpace([0, 1, 2], path3())
    with pytest.raises(ValueError):
        M.dist[0, 1] = 7


# -- snowflake ---------------------------------------------------------------

def test_snowflake_identity():
    M = random_metric(6, 0)
    assert np.array_equal(snowflake(M, 0).dist, M.dist)


def test_snowflake_two_points():
    M = FiniteMetricSpace([0, 1], np.array([[0, 4.0], [4.0, 0]]))
    assert snowflake(M, 0.5).dist[0, 1] == pytest.approx(2.0)


@pytest.mark.parametrize("eps", [-0.1, 1.0, 1.5])
def test_snowflake_bad_eps(eps):
    with pytest.raises(InvalidParameter):
        snowflake(random_metric(3, 0), eps)


def test_snowflake_ten_points_valid():
    M = random_metric(10, 4, kind="graph")
    S = snowflake(M, 0.3)
    D = S.dist
    # check every triple directly
    worst = max(D[i, k] - D[i, j] - D[j, k] for i in range(10) for j in range(10) for k in range(10))
    assert worst <= 1e-12
    assert validate_metric(S) == []


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 9), eps=st.floats(0, 0.99))
def test_snowflake_property(seed, n, eps):
    assert validate_metric(snowflake(random_metric(n, seed, "graph"), eps)) == []


# -- distortion_report -------------------------------------------------------

def test_identity_report():
    M = random_metric(7, 1)
    r = distortion_report(M, M, 0.5)
    assert (r.lipschitz, r.colipschitz, r.distortion, r.avg_expansion) == (1, 1, 1, 1)


@pytest.mark.parametrize("q", [0.25, 0.5, 1.0])
def test_scaled_report(q):
    M = random_metric(7, 1)
    r = distortion_report(M, FiniteMetricSpace(M.labels, 3 * M.dist), q)
    assert r.distortion == pytest.approx(1)
    assert r.lipschitz == pytest.approx(3)
    assert r.avg_expansion == pytest.approx(3 ** q)


def test_l1_vs_l2_triangle():
    pts = np.array([[0, 0], [1, 0], [0, 1]], float)
    r = distortion_report(metric_from_points(PointSet(1, pts)),
                          metric_from_points(PointSet(2, pts)), 0.5)
    # pairs: (0,e1) ratio 1, (0,e2) ratio 1, (e1,e2) ratio sqrt2/2
    assert r.distortion == pytest.approx(math.sqrt(2))
    assert r.avg_expansion == pytest.approx((2 + (math.sqrt(2) / 2) ** 0.5) / 3)


def test_report_size_mismatch():
    with pytest.raises(ShapeError):
        distortion_report(random_metric(4, 0), random_metric(5, 0))


def test_report_relabel_invariance(rng):
    A, B = random_metric(8, 2), random_metric(8, 3)
    perm = rng.permutation(8)
    r1 = distortion_report(A, B)
    r2 = distortion_report(FiniteMetricSpace(list(perm), A.dist[np.ix_(perm, perm)]),
                           FiniteMetricSpace(list(perm), B.dist[np.ix_(perm, perm)]))
    assert r1.distortion == pytest.approx(r2.distortion)
    assert r1.avg_expansion == pytest.approx(r2.avg_expansion)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), q=st.floats(0.05, 1.0))
def test_report_invariants(seed, q):
    r = distortion_report(random_metric(6, seed), random_metric(6, seed + 1), q)
    assert r.lipschitz >= r.colipschitz > 0
    assert r.distortion >= 1
    assert r.colipschitz ** q * (1 - 1e-12) <= r.avg_expansion <= r.lipschitz ** q * (1 + 1e-12)


# -- doubling_constant -------------------------------------------------------

def test_two_point_space():
    M = FiniteMetricSpace([0, 1], np.array([[0, 1.0], [1.0, 0]]))
    assert doubling_constant(M) == 2


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_equilateral(n):
    D = np.ones((n, n)) - np.eye(n)
    assert doubling_constant(FiniteMetricSpace(list(range(n)), D)) == n == brute_doubling(D)


@pytest.mark.parametrize("seed", range(6))
def test_exact_matches_bruteforce(seed):
    M = random_metric(7, seed, "graph")
    assert doubling_constant(M, "exact") == brute_doubling(M.dist)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 16))
def test_greedy_dominates_exact(seed, n):
    M = random_metric(n, seed, "euclid")
    exact = doubling_constant(M, "exact")
    assert 2 <= exact <= n
    assert doubling_constant(M, "greedy") >= exact


def test_exact_size_limit():
    x = np.arange(65, dtype=float)
    M = FiniteMetricSpace(list(range(65)), np.abs(x[:, None] - x[None]))
    with pytest.raises(ResourceLimit):
        doubling_constant(M, "exact")
    assert doubling_constant(M, "greedy") >= 2
