import json
import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from l1lab.errors import CalibrationFailed, EventNotAchieved, InvalidParameter, ShapeError
from l1lab.graphs import random_pointset
from l1lab.metric import PointSet, metric_from_points, pair_ratios
from l1lab.stable import (
    StableOperator,
    acceptance_threshold,
    apply,
    calibrate_C,
    derive_seed,
    embed_theorem1,
    ks_distance_p1,
    laplace_discrepancy,
    ratio_cdf_p1,
    ratio_density_p1,
    ratio_moment_p1,
    sample_operator,
    sample_ratios,
)

INV_SQRT_PI = 1 / math.sqrt(math.pi)


def closed_form_C(p):
    """Scale making C * ||T x|| / ||x||_p satisfy E exp(-a X^2) = exp(-a^(p/2)).

    Uses the LePage constant of a symmetric p-stable law with
    E exp(i t S) = exp(-|t|^p) together with E|g|^p for a standard Gaussian g.
    """
    if p == 1:
        c_p = 2 / math.pi
    else:
        c_p = (1 - p) / (math.gamma(2 - p) * math.cos(math.pi * p / 2))
    g_p = 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi)
    return (c_p / g_p) ** (1 / p) / math.sqrt(2)


# -- operator ----------------------------------------------------------------

def test_one_nonzero_per_row():
    T = sample_operator(1.0, 5, J=200, C=0.7, seed=1)
    M = T.matrix
    assert M.shape == (200, 5)
    assert np.all((M != 0).sum(axis=1) == 1)
    cols = np.floor(5 * T.ys).astype(int)
    assert np.array_equal(np.nonzero(M)[1], cols)
    assert np.allclose(M[np.arange(200), cols], 0.7 * T.gammas ** -1.0 * 5)


def test_p1_magnitudes_decrease():
    T = sample_operator(1.0, 3, J=500, C=1.0, seed=2)
    assert np.all(np.diff(T.gammas) > 0) and T.gammas[0] > 0
    assert np.all(np.diff(T.values) < 0)


def test_operator_deterministic_and_roundtrip():
    a = sample_operator(1.5, 4, J=100, seed=9)
    b = sample_operator(1.5, 4, J=100, seed=9)
    assert np.array_equal(a.matrix, b.matrix)
    c = StableOperator.from_dict(json.loads(json.dumps(a.to_dict())))
    assert np.array_equal(a.matrix, c.matrix)


@pytest.mark.parametrize("p", [0, -1, 2.5])
def test_invalid_p(p):
    with pytest.raises(InvalidParameter):
        sample_operator(p, 2, J=10)


def test_apply_linear(rng):
    T = sample_operator(1.0, 6, J=300, seed=3)
    x, y = rng.standard_normal((2, 6))
    f = lambda v: apply(T, PointSet(1, np.atleast_2d(v))).coords[0]  # noqa: E731
    assert np.array_equal(f(np.zeros(6)), np.zeros(300))
    assert np.allclose(f(2 * x), 2 * f(x))
    assert np.allclose(f(x + y), f(x) + f(y))
    assert np.allclose(f(x), T.matrix @ x)


def test_apply_mismatch():
    T = sample_operator(1.0, 3, J=10, seed=0)
    with pytest.raises(ShapeError):
        apply(T, PointSet(1, np.zeros((2, 4))))
    with pytest.raises(ShapeError):
        apply(T, PointSet(2, np.zeros((2, 3))))


def test_sample_ratios_match_operator():
    # the vectorized sampler and explicit operators agree in law
    x = np.array([1.0, -2.0, 0.5])
    direct = [np.linalg.norm(sample_operator(1.0, 3, J=500, C=1.0, seed=s).matrix @ x) / 3.5
              for s in range(1000)]
    fast = sample_ratios(1.0, 500, 1.0, 4000, seed=1, x=x)
    assert stats.ks_2samp(direct, fast).pvalue > 1e-3


# -- ratio law ---------------------------------------------------------------

def test_density_formula():
    assert ratio_density_p1(0.5) == pytest.approx(4 * math.exp(-1) / math.sqrt(math.pi))
    assert ratio_density_p1(0.5) == pytest.approx(0.8302, abs=1e-4)
    assert ratio_density_p1(1e-3) == 0.0
    with pytest.raises(InvalidParameter):
        ratio_density_p1(0.0)


def test_density_normalized():
    total = (integrate.quad(ratio_density_p1, 0, 1, epsabs=1e-13)[0]
             + integrate.quad(ratio_density_p1, 1, np.inf, epsabs=1e-13)[0])
    assert abs(total - 1) < 1e-8


@pytest.mark.parametrize("x", [0.2, 0.5, 1.0, 1.0484, 3.0, 50.0])
def test_cdf_matches_erfc(x):
    # X^2 is Levy with scale 1/2, so P(X <= x) = erfc(1 / (2x))
    assert ratio_cdf_p1(x) == pytest.approx(special.erfc(1 / (2 * x)), abs=1e-10)


def test_median_from_cdf():
    from scipy.optimize import brentq
    med = brentq(lambda x: ratio_cdf_p1(x) - 0.5, 0.5, 2.0)
    assert med == pytest.approx(1 / (2 * special.erfcinv(0.5)), rel=1e-8)
    assert med == pytest.approx(1.0484, abs=1e-4)


def test_half_moment_closed_form():
    # E X^(1/2) = Gamma(1/4) / (4^(1/4) sqrt(pi))
    exact = math.gamma(0.25) / (4 ** 0.25 * math.sqrt(math.pi))
    assert ratio_moment_p1(0.5) == pytest.approx(exact, rel=1e-9)
    assert 2 * exact < 10


@pytest.mark.slow
def test_histogram_near_half():
    X = sample_ratios(1.0, 10_000, INV_SQRT_PI, 100_000, seed=11)
    h = 0.02
    est = np.mean(np.abs(X - 0.5) < h / 2) / h
    assert est == pytest.approx(0.8302, rel=0.05)


@pytest.mark.slow
def test_median_all_ones_vector():
    C = calibrate_C(1.0, J=10_000, n_samples=20_000, seed=5).C
    x = np.ones(4)
    X = sample_ratios(1.0, 10_000, C, 100_000, seed=6, x=x)
    # sample_ratios divides by ||x||_1, so the median of ||T x||_2 is median(X) * ||x||_1
    assert np.median(X) * 4 == pytest.approx(1.0484 * 4, rel=0.03)


def test_ks_with_closed_form_C():
    X = sample_ratios(1.0, 10_000, INV_SQRT_PI, 20_000, seed=2)
    assert ks_distance_p1(X) < 0.02


def test_ks_detects_wrong_scale():
    X = sample_ratios(1.0, 2000, math.sqrt(2 / math.pi), 20_000, seed=2)
    assert ks_distance_p1(X) > 0.1


def test_heavy_tail():
    X = sample_ratios(1.0, 1000, INV_SQRT_PI, 1_000_000, seed=4)
    for t in (10, 30, 100):
        assert 0.45 <= t * np.mean(X > t) <= 0.70


# -- calibration -------------------------------------------------------------

def test_calibrate_p1_matches_closed_form():
    cal = calibrate_C(1.0, J=2000, n_samples=100_000, seed=0)
    assert cal.C == pytest.approx(INV_SQRT_PI, rel=0.01)
    assert cal.discrepancy < 0.005


@pytest.mark.parametrize("p", [0.5, 1.5])
def test_calibrate_general_p(p):
    # truncating the series at J drops a tail of relative size ~J^(1-2/p),
    # which is slow for p near 2; the calibrated C moves toward the closed form
    exact = closed_form_C(p)
    coarse = calibrate_C(p, J=200, n_samples=100_000, seed=0)
    fine = calibrate_C(p, J=2000, n_samples=100_000, seed=0)
    assert abs(fine.C - exact) <= abs(coarse.C - exact) + 1e-3
    assert fine.C == pytest.approx(exact, rel=0.05)


@pytest.mark.slow
def test_calibrate_p2_converges_slowly():
    # X^2 -> 2 C^2 sum Gamma_j^-1 diverges only logarithmically; the identity
    # e^{-aX^2} ~ e^{-a} holds within a few percent and improves with J
    d_small = calibrate_C(2.0, J=100, n_samples=20_000, seed=0, tol=1.0)
    d_large = calibrate_C(2.0, J=10_000, n_samples=20_000, seed=0, tol=1.0)
    assert d_large.discrepancy < d_small.discrepancy
    assert d_large.discrepancy < 0.03
    with pytest.raises(CalibrationFailed):
        calibrate_C(2.0, J=100, n_samples=20_000, seed=0)


def test_calibration_scale_free():
    a = calibrate_C(1.0, J=500, n_samples=20_000, seed=3).C
    X1 = sample_ratios(1.0, 500, a, 20_000, seed=3, x=np.array([1.0]))
    X2 = sample_ratios(1.0, 500, a, 20_000, seed=3, x=np.array([2.0]))
    assert np.allclose(X1, X2)
    assert laplace_discrepancy(X2, 1.0) < 0.01


# -- rejection-sampled embedding ---------------------------------------------

def test_threshold_natural_log():
    assert acceptance_threshold(64) == pytest.approx(1 / math.sqrt(8 * math.log(64)))


def test_derive_seed():
    a, b = derive_seed(1, 2, 3), derive_seed(1, 2, 4)
    assert a != b and a == derive_seed(1, 2, 3)
    assert 0 <= a < 2 ** 64


def test_two_points_success_rate():
    # one pair: success iff X >= 1/sqrt(8 ln 2); exact probability erfc complement
    t = acceptance_threshold(2)
    p_exact = 1 - special.erfc(1 / (2 * t))
    assert p_exact >= 0.75
    ps = PointSet(1, np.array([[0.0, 0.0], [1.0, -2.0]]))
    C = INV_SQRT_PI
    first = [embed_theorem1(ps, J=2000, seed=s, C=C).tries_used == 1 for s in range(300)]
    assert np.mean(first) == pytest.approx(p_exact, abs=0.06)


def test_theorem1_small():
    ps = random_pointset(16, 5, 1.0, seed=1)
    res = embed_theorem1(ps, J=5000, seed=0, C=INV_SQRT_PI)
    assert res.report.colipschitz >= res.threshold
    assert res.tries_used <= 20
    ratios = pair_ratios(metric_from_points(ps), res.image)
    assert ratios.min() == pytest.approx(res.report.colipschitz)
    assert res.report.q == 0.5


def test_theorem1_event_not_achieved():
    ps = random_pointset(40, 5, 1.0, seed=1)
    with pytest.raises(EventNotAchieved) as info:
        # a tiny C forces every ratio under the threshold
        embed_theorem1(ps, J=200, seed=0, max_tries=3, C=1e-6)
    assert info.value.best.tries_used <= 3


def test_theorem1_rejects_non_l1():
    with pytest.raises(InvalidParameter):
        embed_theorem1(PointSet(2, np.eye(3)), J=10)
