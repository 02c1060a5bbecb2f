"""
Instance generators and the reproduction tables built on them.

Every trial draws from its own stream np.random.default_rng([seed, k]), so
tables are bit-identical for a fixed seed whatever order trials run in.
"""

import logging
import math
import typing as t

import numpy as np
from scipy.optimize import brentq

from .bounds import arcsinh_bound, c_hat, compute_c_star
from .errors import HypextError
from .geometry import _boost, _dist, _max_ratio, _renormalize
from .models.maps import PartialMap
from .models.point import HPoint
from .pipeline import choose_parameters, run_pipeline
from .sampling import point_at, sample_ball, sample_ball_rows
from .solver import solve_one_point

_log = logging.getLogger('hypext.experiments')

TRIANGLE_SIDES = (1.0, 2.0, 3.0)


def _random_isometry(m: int, rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    rotation = np.eye(m + 1)
    rotation[1:, 1:] = q
    shift = sample_ball_rows(m, 1.0, 1, rng)[0]
    return _boost(shift) @ rotation


def _contract(rows: np.ndarray, c: float) -> np.ndarray:
    """Radial homothety of ratio c about the origin, applied row by row."""
    if c == 1.0:
        return rows.copy()
    rho = np.arccosh(np.maximum(rows[:, 0], 1.0))
    spatial = rows[:, 1:]
    norms = np.linalg.norm(spatial, axis=1)
    dirs = np.where(norms[:, None] > 0, spatial / np.where(norms > 0, norms, 1.0)[:, None], 0.0)
    return np.hstack([np.cosh(c * rho)[:, None], np.sinh(c * rho)[:, None] * dirs])


def _homothety_ratio(sources: np.ndarray, C: float) -> float:
    """
    Ratio s of the radial homothety whose image of sources has Lipschitz
    constant C, or a hair below. The constant is 1 at s = 1 and at least
    C at s = C when C > 1, so the root lies between them.
    """
    goal = C * (1.0 - 1e-9)
    if sources.shape[0] < 2:
        return C
    if C == 1.0:
        return goal

    def gap(s):
        return _max_ratio(sources, _contract(sources, s))[0] - goal

    lo, hi = min(C, 1.0), max(C, 1.0)
    if gap(lo) >= 0:
        return lo
    return brentq(gap, lo, hi, xtol=1e-13)


def random_instance(m: int, n: int, C: float, rng: np.random.Generator, radius: float = 2.0,
                    noise: float = 0.3, max_tries: int = 30, tight: float = 0.9) -> t.Tuple[PartialMap, HPoint]:
    """
    A C-Lipschitz map on n random points of B(radius) and a challenge point in
    the same ball. Targets are an isometric copy of a radial homothety of the
    sources tuned so its constant is C, then jittered; a jitter is kept only
    when the constant stays in [tight * C, C], and halved otherwise.
    """
    sources = sample_ball_rows(m, radius, n, rng)
    base = _renormalize(_contract(sources, _homothety_ratio(sources, C)) @ _random_isometry(m, rng).T)

    scale = noise
    targets = base
    for _ in range(max_tries):
        jitter = rng.standard_normal((n, m))
        lengths = scale * rng.uniform(0.0, 1.0, n)
        targets = np.array([point_at(base[i], jitter[i], lengths[i]) for i in range(n)])
        if n < 2 or tight * C <= _max_ratio(sources, targets)[0] <= C:
            break
        scale /= 2.0
    else:
        targets = base

    xi = sample_ball_rows(m, radius, 1, rng)[0]
    while n and _dist(xi, sources).min() <= 1e-3:
        xi = sample_ball_rows(m, radius, 1, rng)[0]
    return PartialMap(sources, targets, C), HPoint(xi, check=False)


def circumradius(side: float) -> float:
    return math.asinh(math.sqrt(2.0 / 3.0 * (math.cosh(side) - 1.0)))


def _triangle(m: int, rho: float) -> np.ndarray:
    rows = np.zeros((3, m + 1))
    for k in range(3):
        a = 2.0 * math.pi * k / 3.0
        rows[k, 0] = math.cosh(rho)
        rows[k, 1] = math.sinh(rho) * math.cos(a)
        rows[k, 2] = math.sinh(rho) * math.sin(a)
    return rows


def triangle_instance(side: float, C: float, m: int = 2) -> t.Tuple[PartialMap, HPoint]:
    """Equilateral triangle of the given side onto the concentric one of side C * side; challenge at the center."""
    if m < 2:
        raise ValueError('Triangles need dimension at least 2')
    pmap = PartialMap(_triangle(m, circumradius(side)), _triangle(m, circumradius(C * side)), C)
    return pmap, HPoint.origin(m)


def lemma_case(pmap: PartialMap, xi: HPoint, C: float, solution=None) -> t.Tuple[str, float]:
    """
    'far' when some active source is at least r_star from xi (bound c_hat),
    'near' otherwise (bound arcsinh(C sinh r_star) / r_star).
    """
    report = compute_c_star(C)
    sol = solution or solve_one_point(pmap, xi)
    lengths = _dist(xi.coords, pmap.sources[sol.active_indices])
    if lengths.max() >= report.r_star:
        return 'far', c_hat(C, report.r_star)
    return 'near', arcsinh_bound(C, report.r_star)


def theorem_a_trials(count: int = 200, seed: int = 0) -> t.List[dict]:
    """
    c_xi <= declared_C for random maps with declared_C in [1, 3] in H^2 and H^3.
    The constant column is the drawn map's own Lipschitz constant, which
    random_instance keeps within a tenth of declared_C.
    """
    rows = []
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        m = 2 + k % 2
        n = int(rng.integers(2, 9))
        C = float(rng.uniform(1.0, 3.0))
        pmap, xi = random_instance(m, n, C, rng)
        sol = solve_one_point(pmap, xi)
        rows.append({'trial': k, 'm': m, 'n': n, 'C': C, 'constant': _max_ratio(pmap.sources, pmap.targets)[0],
                     'c_xi': sol.c_xi, 'converged': sol.converged,
                     'passed': sol.c_xi <= C + 1e-6})
    return rows


def lemma_one_trials(C_grid: t.Sequence[float], trials: int = 100, seed: int = 0) -> t.List[dict]:
    """Per C: c_star, the worst observed c_xi and how often each case of the bound applied."""
    rows = []
    for C in C_grid:
        report = compute_c_star(C)
        worst, cases, violations = 0.0, {'far': 0, 'near': 0}, 0
        for k in range(trials):
            rng = np.random.default_rng([seed, int(round(C * 1000)), k])
            pmap, xi = random_instance(2 + k % 2, int(rng.integers(2, 9)), C, rng)
            sol = solve_one_point(pmap, xi)
            case, _ = lemma_case(pmap, xi, C, sol)
            cases[case] += 1
            worst = max(worst, sol.c_xi)
            violations += int(sol.c_xi > report.c_star + 1e-6)
        rows.append({'C': C, 'c_star': report.c_star, 'max_c_xi': worst, 'far': cases['far'],
                     'near': cases['near'], 'violations': violations,
                     'passed': report.c_star < 1.0 - 1e-6 and violations == 0})
    return rows


def loss_curve(C_grid: t.Sequence[float], trials: int = 20, seed: int = 0,
               pipeline_samples: int = 6) -> t.List[dict]:
    """
    Empirical lower bounds for the loss function: the largest one-point
    constant met on random C-Lipschitz maps and on the triangle family,
    next to the upper bounds c_star and the empirical global constant of a
    small pipeline run (skipped when pipeline_samples is 0).
    """
    rows = []
    for C in C_grid:
        report = compute_c_star(C)
        lower = 0.0
        for k in range(trials):
            rng = np.random.default_rng([seed, int(round(C * 1000)), k])
            pmap, xi = random_instance(2, int(rng.integers(2, 7)), C, rng)
            lower = max(lower, solve_one_point(pmap, xi).c_xi)
        triangle = max(solve_one_point(*triangle_instance(side, C)).c_xi for side in TRIANGLE_SIDES)
        lower = max(lower, triangle)

        c_prime = None
        if pipeline_samples > 0:
            rng = np.random.default_rng([seed, int(round(C * 1000)), trials])
            pmap, _ = random_instance(2, 3, C, rng)
            cfg = choose_parameters(C, seed=seed)
            try:
                c_prime = run_pipeline(pmap, sample_ball(2, 1.5, pipeline_samples, rng), cfg).c_prime_empirical
            except HypextError as error:
                _log.warning('Pipeline run for C=%.3g failed: %s', C, error)

        rows.append({'C': C, 'lower': lower, 'triangle': triangle, 'c_star': report.c_star,
                     'c_prime_empirical': c_prime, 'alpha': math.log(lower) / math.log(C),
                     'ratio': (1.0 - lower) / (1.0 - C)})
        _log.info('Loss curve C=%.3g: lower %.9g, c_star %.9g', C, lower, report.c_star)
    return rows


def scaling_table(C_grid: t.Sequence[float]) -> t.List[dict]:
    rows = []
    for C in C_grid:
        cfg = choose_parameters(C)
        report = compute_c_star(C)
        rows.append({'C': C, 'one_minus_c_star': 1.0 - cfg.c_star, 'r_star': report.r_star,
                     'epsilon0': cfg.epsilon0, 'epsilon': cfg.epsilon, 'R': cfg.R})
    return rows


def fit_loglog_slope(xs: t.Sequence[float], ys: t.Sequence[float]) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)), 1)
    return float(slope)
