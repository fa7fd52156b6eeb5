import numpy as np
import pytest

from l1lab.errors import RealizationFailed
from l1lab.graphs import WeightedGraph, diamond, laakso, shortest_path_metric
from l1lab.metric import distortion_report, metric_from_points
from l1lab.realize import all_cuts, connected_cuts, l1_realize


def test_single_edge():
    R = l1_realize(WeightedGraph(2, [(0, 1, 1.0)]))
    assert R.points.p == 1
    assert metric_from_points(R.points).dist[0, 1] == pytest.approx(1.0)


@pytest.mark.parametrize("G", [diamond(1), laakso(1)], ids=["diamond1", "laakso1"])
def test_isometric(G):
    R = l1_realize(G)
    assert R.distortion <= 1 + 1e-6
    src = shortest_path_metric(G)
    img = metric_from_points(R.points)
    # coordinates are cuts scaled by their weights, so the image is exact
    assert np.allclose(img.dist, src.dist, atol=1e-7)


def test_reported_distortion_bounds_report():
    G = laakso(2)
    R = l1_realize(G, max_distortion=np.inf)
    rep = distortion_report(shortest_path_metric(G), R.points)
    assert rep.distortion <= R.distortion * (1 + 1e-7)
    assert R.distortion == pytest.approx(1.125, abs=1e-6)


def test_diamond2_not_isometric():
    # D_2 is not an l1 metric; the best cut combination has distortion 5/4
    with pytest.raises(RealizationFailed) as info:
        l1_realize(diamond(2))
    assert info.value.best_distortion == pytest.approx(1.25, abs=1e-6)


def test_cut_counts():
    assert len(all_cuts(5)) == 2 ** 4 - 1
    # every bond of a 4-cycle: the 4 single vertices and the 2 adjacent pairs
    assert len(connected_cuts(diamond(1))) == 6
