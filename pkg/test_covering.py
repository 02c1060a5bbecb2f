"""
Tests for greedy nets, R-separated bins and the volume bound on bin counts.
"""

import math

import numpy as np
import pytest

from hypext import HPoint, assign_bins, build_net, greedy_net, volume_bound_N
from hypext.covering import _ball_volume_h
from hypext.geometry import _pairwise
from hypext.models.maps import as_rows
from hypext.sampling import sample_ball


def test_single_point_net():
    x = HPoint.from_spatial([0.2, 0.1])
    net = greedy_net([x], 0.5)
    assert len(net) == 1 and np.array_equal(net[0].coords, x.coords)


def test_close_points_keep_the_first():
    a = HPoint.from_spatial([0.0, 0.0])
    b = HPoint.from_spatial([0.1, 0.0])
    net = greedy_net([a, b], 0.5)
    assert len(net) == 1 and np.array_equal(net[0].coords, a.coords)


def test_net_is_sparse_and_covers(rng):
    sample = sample_ball(2, 3.0, 500, rng)
    eps = 0.6
    net = as_rows(greedy_net(sample, eps))
    d = _pairwise(net)
    np.fill_diagonal(d, np.inf)
    assert d.min() >= eps
    assert _pairwise(as_rows(sample), net).min(axis=1).max() < eps


def test_net_is_deterministic(rng):
    sample = sample_ball(3, 2.0, 100, rng)
    assert np.array_equal(as_rows(greedy_net(sample, 0.5)), as_rows(greedy_net(sample, 0.5)))


def test_bins_of_far_apart_centers():
    centers = [HPoint.from_spatial([math.sinh(5.0 * k), 0.0]) for k in range(4)]
    assert assign_bins(centers, 4.0) == [0, 0, 0, 0]


def test_bins_of_two_close_centers():
    centers = [HPoint.from_spatial([0.0, 0.0]), HPoint.from_spatial([0.5, 0.0])]
    assert assign_bins(centers, 1.0) == [0, 1]


def test_bins_are_separated_and_first_fit(rng):
    R = 1.5
    centers = greedy_net(sample_ball(2, 3.0, 400, rng), 0.4)
    bins = assign_bins(centers, R)
    d = _pairwise(as_rows(centers))
    n = len(centers)
    for i in range(n):
        for j in range(i + 1, n):
            if bins[i] == bins[j]:
                assert d[i, j] >= R
    earlier = max(int(np.sum(d[i, :i] < R)) for i in range(n))
    assert max(bins) + 1 <= 1 + earlier
    for i in range(n):
        # first fit: every lower bin has a close earlier center
        for b in range(bins[i]):
            assert any(bins[j] == b and d[i, j] < R for j in range(i))


def test_volume_bound_example():
    """ceil(8 (cosh 1.5 - 1)) = 11"""
    assert volume_bound_N(2, 1.0, 1.0) == 11


def test_volume_bound_grows_as_epsilon_shrinks():
    values = [volume_bound_N(2, 2.0, eps) for eps in (1.0, 0.5, 0.25, 0.1, 0.05)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_numeric_volumes_match_closed_forms():
    rho = 1.3
    integral = (math.sinh(2 * rho) - 2 * rho) / 4
    assert _ball_volume_h(3, rho) == pytest.approx(4 * math.pi * integral, rel=1e-12)
    cosh = math.cosh(rho)
    closed = 2 * math.pi ** 2 * (cosh ** 3 / 3 - cosh + 2 / 3)
    assert _ball_volume_h(4, rho) == pytest.approx(closed, rel=1e-9)


def test_net_packing_respects_volume_bound(rng):
    net = build_net(sample_ball(2, 3.0, 300, rng), 0.5, 1.2)
    assert net.num_bins <= net.theoretical_N
    d = _pairwise(net.centers)
    assert int((d < net.R).sum(axis=1).max()) <= net.theoretical_N
    assert sorted(set(net.bin_of)) == list(range(net.num_bins))


def test_build_net_rejects_bad_radii(rng):
    with pytest.raises(ValueError):
        build_net(sample_ball(2, 1.0, 10, rng), 0.5, 0.4)
