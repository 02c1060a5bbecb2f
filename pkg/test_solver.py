"""
Tests for the one-point solver, its certificate and sequential extension.
"""

import math

import numpy as np
import pytest

from hypext import (ConvergenceError, HPoint, PartialMap, SolverError, SolverOptions, certify_hull,
                    compute_c_star, distance, eval_phi, geodesic_point, lipschitz_constant, obtuse_pair,
                    radial_homothety, sequential_extension, solve_one_point)
from hypext.experiments import circumradius, random_instance
from hypext.sampling import sample_ball


def _pair_map():
    a, b = HPoint.from_spatial([math.sinh(1.0), 0.0]), HPoint.from_spatial([-math.sinh(1.0), 0.0])
    return PartialMap([a, b], [a, b], 1.0)


def test_singleton_map():
    """A one-point map extends with constant 0 by sending everything to its image"""
    y0 = HPoint.from_spatial([0.5, 0.5])
    pmap = PartialMap([HPoint.origin(2)], [y0], 1.0)
    xi = HPoint.from_spatial([1.0, 0.0])
    assert eval_phi(pmap, xi, y0) == 0.0
    sol = solve_one_point(pmap, xi)
    assert sol.c_xi == pytest.approx(0.0, abs=1e-12)
    assert distance(sol.eta, y0) <= 1e-9
    assert certify_hull(sol, pmap).passed


def test_eval_phi_rejects_source_point():
    pmap = _pair_map()
    with pytest.raises(SolverError):
        eval_phi(pmap, pmap.source_points[0], HPoint.origin(2))


def test_phi_is_convex_along_geodesics(rng):
    """phi_xi is a max of geodesically convex functions, so it is convex on every geodesic"""
    for _ in range(20):
        pmap, xi = random_instance(2 + int(rng.integers(0, 2)), 5, 0.8, rng)
        a, b = sample_ball(pmap.dimension, 2.5, 2, rng)
        fa, fb = eval_phi(pmap, xi, a), eval_phi(pmap, xi, b)
        for s in np.linspace(0.0, 1.0, 11):
            assert eval_phi(pmap, xi, geodesic_point(a, b, s)) <= (1.0 - s) * fa + s * fb + 1e-9


def test_polish_first_agrees_with_subgradient_path(rng):
    for _ in range(10):
        pmap, xi = random_instance(2, int(rng.integers(3, 9)), 0.7, rng)
        fast = solve_one_point(pmap, xi)
        slow = solve_one_point(pmap, xi, SolverOptions(polish_first=False))
        assert fast.converged
        assert fast.c_xi == pytest.approx(slow.c_xi, abs=1e-7)
        assert certify_hull(fast, pmap).passed


def test_xi_on_source_returns_its_image():
    pmap = _pair_map()
    sol = solve_one_point(pmap, pmap.source_points[1])
    assert sol.on_source
    assert sol.c_xi == pmap.declared_C
    assert np.array_equal(sol.eta.coords, pmap.targets[1])


def test_symmetric_pair_midpoint():
    """Identity on two points at distance 2: the midpoint keeps both ratios at 1"""
    pmap = _pair_map()
    sol = solve_one_point(pmap, HPoint.origin(2))
    assert sol.c_xi == pytest.approx(1.0, abs=1e-8)
    assert distance(sol.eta, HPoint.origin(2)) <= 1e-6
    assert sorted(sol.active_indices) == [0, 1]
    assert certify_hull(sol, pmap).passed


def test_triangle_circumradius_oracle(triangle):
    """Side 2 onto side 1.8: the optimal constant is the ratio of circumradii, strictly above 0.9"""
    pmap, xi = triangle
    sol = solve_one_point(pmap, xi)
    assert sol.converged
    assert sol.c_xi == pytest.approx(circumradius(1.8) / circumradius(2.0), abs=1e-5)
    assert sol.c_xi - 0.9 >= 4e-3
    assert sorted(sol.active_indices) == [0, 1, 2]
    assert certify_hull(sol, pmap).passed


def test_solution_invariants(rng):
    pmap, xi = random_instance(2, 6, 1.5, rng)
    sol = solve_one_point(pmap, xi)
    ratios = sol.ratios(pmap.sources, pmap.targets)
    assert ratios.max() == pytest.approx(sol.c_xi, abs=1e-8)
    assert np.all(ratios[sol.active_indices] >= sol.c_xi - 1e-6 * max(sol.c_xi, 1.0))
    assert sum(sol.hull_weights) == pytest.approx(1.0)
    assert min(sol.hull_weights) >= 0.0


@pytest.mark.parametrize('seed', range(20))
def test_no_loss_for_constants_at_least_one(seed):
    """Maps with declared_C >= 1 extend to one more point without raising the constant"""
    rng = np.random.default_rng([11, seed])
    C = float(rng.uniform(1.0, 3.0))
    pmap, xi = random_instance(2 + seed % 2, int(rng.integers(2, 9)), C, rng)
    sol = solve_one_point(pmap, xi)
    assert sol.c_xi <= C + 1e-6


@pytest.mark.parametrize('seed', range(10))
def test_contracting_maps_stay_below_c_star(seed):
    rng = np.random.default_rng([12, seed])
    pmap, xi = random_instance(2, int(rng.integers(2, 8)), 0.5, rng)
    sol = solve_one_point(pmap, xi)
    assert sol.c_xi <= compute_c_star(0.5).c_star + 1e-6


@pytest.mark.parametrize('seed', range(10))
def test_hull_certificate_on_converged_solutions(seed):
    rng = np.random.default_rng([13, seed])
    pmap, xi = random_instance(2 + seed % 2, int(rng.integers(3, 8)), 0.8, rng)
    sol = solve_one_point(pmap, xi)
    if sol.converged and sol.c_xi > 1e-6:
        cert = certify_hull(sol, pmap)
        assert cert.passed, cert.reason
        assert len(cert.active_indices) >= 2


def test_optimal_image_is_unique(rng):
    """Five random starting points end at the same eta"""
    pmap, xi = random_instance(2, 5, 0.8, rng)
    etas = [solve_one_point(pmap, xi, init=start).eta for start in sample_ball(2, 2.0, 5, rng)]
    for a in etas:
        for b in etas:
            assert distance(a, b) <= 1e-5


def test_more_sources_never_lower_the_constant(rng):
    pmap, xi = random_instance(2, 6, 0.7, rng)
    full = solve_one_point(pmap, xi).c_xi
    for k in range(1, pmap.n):
        assert solve_one_point(pmap.restricted(range(k)), xi).c_xi <= full + 1e-7


def test_strict_mode_raises_when_iterations_run_out(triangle):
    pmap, xi = triangle
    opts = SolverOptions(max_iters=1, polish_rounds=1, polish_first=False)
    assert not solve_one_point(pmap, xi, opts).converged
    with pytest.raises(ConvergenceError):
        solve_one_point(pmap, xi, opts, strict=True)


def test_non_minimizer_fails_certificate(triangle):
    """A point that is not a minimizer is caught by the certificate"""
    pmap, xi = triangle
    sol = solve_one_point(pmap, xi)
    sol.eta = HPoint.from_spatial([0.3, 0.0])
    assert not certify_hull(sol, pmap).passed


@pytest.mark.parametrize('a', [0.01, 1.0, 6.0])
def test_certificate_does_not_depend_on_scale(a):
    """Symmetric pair at distance a each side: the midpoint certifies at every scale"""
    x, y = HPoint.from_spatial([math.sinh(a), 0.0]), HPoint.from_spatial([-math.sinh(a), 0.0])
    u, v = HPoint.from_spatial([0.0, math.sinh(a / 2)]), HPoint.from_spatial([0.0, -math.sinh(a / 2)])
    pmap = PartialMap([x, y], [u, v], 1.0)
    sol = solve_one_point(pmap, HPoint.origin(2))
    cert = certify_hull(sol, pmap)
    assert sol.c_xi == pytest.approx(0.5, abs=1e-8)
    assert cert.passed
    assert cert.norm <= 1e-6


def test_obtuse_pair_on_triangle(triangle):
    """Seen from the center, the reference vertex makes 120 degrees with the other two"""
    pmap, xi = triangle
    sol = solve_one_point(pmap, xi)
    choice = obtuse_pair(sol, pmap, pmap.target_points[0])
    assert choice.index in (1, 2)
    assert choice.certified
    assert choice.angle == pytest.approx(2 * math.pi / 3, abs=1e-4)


def test_obtuse_pair_on_random_instances(rng):
    for _ in range(5):
        pmap, xi = random_instance(2, 5, 0.6, rng)
        sol = solve_one_point(pmap, xi)
        reference = sample_ball(2, 2.0, 1, rng)[0]
        if distance(reference, sol.eta) > 1e-6:
            assert obtuse_pair(sol, pmap, reference).angle >= math.pi / 2 - 1e-6


def test_sequential_extension_empty_queue(half_map):
    pmap, _ = half_map
    assert sequential_extension(pmap, []) is pmap


def test_sequential_extension_single_point_matches_solver(half_map):
    pmap, xi = half_map
    extended = sequential_extension(pmap, [xi])
    assert extended.n == pmap.n + 1
    assert np.allclose(extended.targets[-1], solve_one_point(pmap, xi).eta.coords)


def test_sequential_extension_keeps_constant(rng):
    pmap, _ = random_instance(2, 5, 1.5, rng)
    extended = sequential_extension(pmap, sample_ball(2, 2.5, 12, rng))
    assert extended.n == 17
    assert extended.declared_C <= 1.5 + 1e-6
    assert lipschitz_constant(extended)[0] == pytest.approx(extended.declared_C)


def test_lipschitz_constant_examples():
    pmap = _pair_map()
    value, pair = lipschitz_constant(pmap)
    assert value == pytest.approx(1.0, abs=1e-12)
    assert pair == (0, 1)
    y0 = HPoint.from_spatial([0.2, 0.2])
    constant = PartialMap(pmap.sources, [y0, y0], 1.0)
    assert lipschitz_constant(constant)[0] == 0.0
    with pytest.raises(SolverError):
        lipschitz_constant(pmap.restricted([0]))


def test_lipschitz_constant_of_homothety_image(rng):
    """Contracting towards the origin by c gives a c-Lipschitz map"""
    o = HPoint.origin(2)
    sources = sample_ball(2, 2.0, 30, rng)
    targets = [radial_homothety(o, 0.5, x) for x in sources]
    value, _ = lipschitz_constant(PartialMap(sources, targets, 0.5))
    assert value <= 0.5 + 1e-9
