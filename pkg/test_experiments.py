"""
Tests for instance generators and the reproduction tables.
"""

import math

import numpy as np
import pytest

from hypext import compute_c_star, lipschitz_constant, solve_one_point
from hypext.experiments import (TRIANGLE_SIDES, circumradius, fit_loglog_slope, lemma_case, lemma_one_trials,
                                loss_curve, random_instance, scaling_table, theorem_a_trials,
                                triangle_instance)
from hypext.geometry import _dist, _pairwise


@pytest.mark.parametrize('m,n,C', [(2, 2, 0.5), (2, 6, 0.3), (3, 5, 0.9), (3, 4, 2.5)])
def test_random_instance_is_lipschitz(m, n, C):
    pmap, xi = random_instance(m, n, C, np.random.default_rng([m, n]))
    assert pmap.n == n and pmap.dimension == m and xi.dimension == m
    assert pmap.declared_C == C
    assert lipschitz_constant(pmap)[0] <= C + 1e-12
    assert _dist(xi.coords, pmap.sources).min() > 1e-3


@pytest.mark.parametrize('m,n,C', [(2, 2, 0.5), (2, 6, 0.3), (3, 5, 1.0), (2, 7, 1.7), (3, 4, 2.5)])
def test_random_instance_constant_is_close_to_declared(m, n, C):
    pmap, _ = random_instance(m, n, C, np.random.default_rng([m, n, 1]))
    assert 0.9 * C <= lipschitz_constant(pmap)[0] <= C


def test_random_instance_is_reproducible():
    a, xa = random_instance(2, 5, 0.7, np.random.default_rng(99))
    b, xb = random_instance(2, 5, 0.7, np.random.default_rng(99))
    assert np.array_equal(a.sources, b.sources)
    assert np.array_equal(a.targets, b.targets)
    assert np.array_equal(xa.coords, xb.coords)


def test_triangle_instance_geometry():
    pmap, xi = triangle_instance(2.0, 0.9)
    iu, ju = np.triu_indices(3, k=1)
    assert _pairwise(pmap.sources)[iu, ju] == pytest.approx([2.0] * 3, abs=1e-9)
    assert _pairwise(pmap.targets)[iu, ju] == pytest.approx([1.8] * 3, abs=1e-9)
    assert _dist(xi.coords, pmap.sources) == pytest.approx([circumradius(2.0)] * 3, abs=1e-12)


def test_triangle_instance_in_three_dimensions():
    pmap, xi = triangle_instance(1.0, 0.5, m=3)
    assert pmap.dimension == 3 and xi.dimension == 3
    assert pmap.sources[:, 3] == pytest.approx([0.0] * 3)


def test_triangle_needs_a_plane():
    with pytest.raises(ValueError):
        triangle_instance(1.0, 0.5, m=1)


def test_triangle_beats_the_input_constant():
    for side in TRIANGLE_SIDES:
        sol = solve_one_point(*triangle_instance(side, 0.5))
        ratio = circumradius(0.5 * side) / circumradius(side)
        assert sol.c_xi == pytest.approx(ratio, abs=1e-6)
        assert 0.5 < sol.c_xi <= compute_c_star(0.5).c_star


def test_lemma_case_reports_a_valid_bound(half_map):
    pmap, xi = half_map
    case, bound = lemma_case(pmap, xi, 0.5)
    report = compute_c_star(0.5)
    assert case in ('far', 'near')
    assert bound <= report.c_star + 1e-12
    assert solve_one_point(pmap, xi).c_xi <= report.c_star + 1e-6


def test_lemma_case_far_for_spread_triangle():
    pmap, xi = triangle_instance(12.0, 0.5)
    assert circumradius(12.0) >= compute_c_star(0.5).r_star
    assert lemma_case(pmap, xi, 0.5)[0] == 'far'


def test_theorem_a_trials_pass():
    rows = theorem_a_trials(count=6, seed=4)
    assert [row['trial'] for row in rows] == list(range(6))
    assert [row['m'] for row in rows] == [2, 3, 2, 3, 2, 3]
    assert all(row['passed'] for row in rows)
    assert all(1.0 <= row['C'] <= 3.0 for row in rows)
    assert all(0.9 * row['C'] <= row['constant'] <= row['C'] for row in rows)


def test_lemma_one_trials_pass():
    (row,) = lemma_one_trials([0.5], trials=5, seed=1)
    assert row['passed'] and row['violations'] == 0
    assert row['far'] + row['near'] == 5
    assert row['max_c_xi'] <= row['c_star'] + 1e-6


def test_loss_curve_brackets_the_loss():
    rows = loss_curve([0.5, 0.9], trials=3, seed=2, pipeline_samples=0)
    for row in rows:
        assert row['C'] < row['triangle'] <= row['lower'] <= row['c_star'] + 1e-6
        assert row['c_prime_empirical'] is None
        assert row['alpha'] == pytest.approx(math.log(row['lower']) / math.log(row['C']))
        assert 0.0 < row['ratio'] < 1.0


def test_loss_curve_reports_the_pipeline_constant():
    (row,) = loss_curve([0.5], trials=2, seed=3)
    assert row['c_prime_empirical'] is not None
    assert row['lower'] <= row['c_prime_empirical'] < 1.0
    assert row['c_star'] < row['c_prime_empirical']


def test_loss_curve_is_reproducible():
    assert loss_curve([0.7], trials=2, seed=5) == loss_curve([0.7], trials=2, seed=5)


def test_scaling_table_columns():
    rows = scaling_table([0.5, 0.7, 0.9])
    gaps = [row['one_minus_c_star'] for row in rows]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert all(row['epsilon'] < row['epsilon0'] < row['R'] for row in rows)


def test_loglog_slope_of_power_law():
    xs = [0.1, 0.05, 0.02, 0.01]
    assert fit_loglog_slope(xs, [3.0 * x ** 2 for x in xs]) == pytest.approx(2.0)


def test_c_star_gap_follows_a_power_law():
    Cs = [0.9, 0.93, 0.96, 0.99]
    slope = fit_loglog_slope([1 - C for C in Cs], [1 - compute_c_star(C).c_star for C in Cs])
    assert 1.5 <= slope <= 2.5
