"""
Global extension of a C-Lipschitz map (C < 1) with constant strictly below 1.

The construction: pick a sparse net of the sample, place a certified
sqrt(c_star)-Lipschitz patch around every net center, split the centers into
bins whose members are far apart, extend f together with one bin's patches to
the whole sample (a 1-Lipschitz extension), and average the per-bin maps.
On every net ball the owning bin contributes sqrt(c_star) and the others at
most 1, so the average is 1 - (1 - sqrt(c_star)) / num_bins Lipschitz there.
"""

import logging
import math
import typing as t
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.optimize import bisect

from .averaging import average_maps
from .bounds import compute_c_star
from .config import DELTA, PipelineConfig
from .covering import build_net
from .errors import CertificateError, PipelineError
from .geometry import Hyperboloid, _dist, _exp_rows, _max_ratio, _pairwise, _tangent_basis, distance
from .models.maps import COINCIDENCE_TOL, MapTable, PartialMap, as_rows
from .models.point import HPoint
from .models.result import CASES, ExtensionResult, Patch, TwoCenterReport
from .sampling import sample_ball_rows
from .solver import chart_extension, lipschitz_constant, sequential_extension, solve_one_point

_log = logging.getLogger('hypext.pipeline')

CERT_SLACK = 1e-6


def _distortion_gap(eps0: float, c_star: float) -> float:
    return 2.0 * math.log(math.sinh(eps0) / eps0) + 0.5 * math.log(c_star)


def choose_parameters(C: float, **overrides) -> PipelineConfig:
    """
    epsilon0 is the largest radius with (sinh e / e)^2 <= c_star^(-1/2);
    epsilon and R sit on the boundary of the two buffer inequalities.
    """
    report = compute_c_star(C)
    c_star = report.c_star
    hi = 1.0
    while _distortion_gap(hi, c_star) <= 0:
        hi *= 2.0
    eps0 = bisect(_distortion_gap, 1e-9, hi, args=(c_star,), xtol=1e-12) * (1.0 - 1e-10)
    eps = min(eps0 * (1.0 - c_star) / 2.0, eps0 / 4.0) * (1.0 - 1e-12)
    R = max((DELTA + 4.0 * eps) / (1.0 - c_star) * (1.0 + 1e-12), 1.0 + 1e-9)
    cfg = PipelineConfig(C=C, c_star=c_star, epsilon0=eps0, epsilon=eps, R=R, **overrides)
    _log.info('Parameters for C=%.6g: c_star=%.9g eps0=%.6g eps=%.6g R=%.6g',
              C, c_star, eps0, eps, R)
    return cfg


def chart_distortion(xi: HPoint, samples: t.Sequence[HPoint]) -> t.Tuple[float, float]:
    """Smallest and largest ratio of tangent-chart distance at xi to hyperbolic distance over sample pairs."""
    rows = as_rows(samples)
    space = Hyperboloid(xi.dimension)
    chart = space.coords(xi.coords, space.basis(xi.coords), rows)
    n = rows.shape[0]
    if n < 2:
        return 1.0, 1.0
    iu, ju = np.triu_indices(n, k=1)
    dh = _pairwise(rows)[iu, ju]
    dc = np.linalg.norm(chart[iu] - chart[ju], axis=1)
    ok = dh > COINCIDENCE_TOL
    ratio = dc[ok] / dh[ok]
    return float(ratio.min()), float(ratio.max())


def local_patch(pmap: PartialMap, xi: HPoint, cfg: PipelineConfig, ball_sample: t.Sequence[HPoint],
                solution=None) -> Patch:
    """
    Extend f plus xi -> eta over a sample of B(xi, epsilon0) through the
    tangent charts at xi and eta. The table lists xi first and then the ball
    points other than xi in their given order. Raises CertificateError when
    the patched map is not sqrt(c_star)-Lipschitz on the ball and nearby sources.
    """
    sol = solution or solve_one_point(pmap, xi, cfg.solver)
    x0, y0 = xi.coords, sol.eta.coords
    ball = as_rows(ball_sample)
    if ball.size == 0:
        ball = np.empty((0, x0.size))
    if len(ball) and _dist(x0, ball).max() > cfg.epsilon0 + COINCIDENCE_TOL:
        raise PipelineError('Ball sample leaves B(xi, epsilon0)', stage='patch')

    lengths = _dist(x0, pmap.sources)
    anchors = np.flatnonzero((lengths <= cfg.epsilon0) & (lengths > COINCIDENCE_TOL))
    rest = ball[_dist(x0, ball) > COINCIDENCE_TOL] if len(ball) else ball

    known_src = np.vstack([x0, pmap.sources[anchors]])
    known_tgt = np.vstack([y0, pmap.targets[anchors]])
    hits = _pairwise(rest, known_src) if len(rest) else np.empty((0, len(known_src)))
    fresh = hits.min(axis=1) > COINCIDENCE_TOL if len(rest) else np.zeros(0, dtype=bool)

    space = Hyperboloid(xi.dimension)
    bx, by = _tangent_basis(x0), _tangent_basis(y0)
    images = np.empty_like(rest)
    if (~fresh).any():
        images[~fresh] = known_tgt[np.argmin(hits[~fresh], axis=1)]
    if fresh.any():
        chart = chart_extension(space.coords(x0, bx, known_src), space.coords(y0, by, known_tgt),
                                space.coords(x0, bx, rest[fresh]), cfg.solver)
        images[fresh] = _exp_rows(y0, chart @ by.T)

    table = MapTable(np.vstack([x0, rest]), np.vstack([y0, images]), label='patch')
    cert_src = np.vstack([table.domain, pmap.sources[anchors]])
    cert_tgt = np.vstack([table.images, pmap.targets[anchors]])
    constant = _max_ratio(cert_src, cert_tgt)[0] if len(cert_src) >= 2 else 0.0
    patch = Patch(xi=x0, solution=sol, table=table, anchors=anchors.tolist(),
                  constant=constant, bound=cfg.sqrt_c_star)
    if not patch.passed:
        raise CertificateError(
            f'Patch at {x0.tolist()} is {constant:.9g}-Lipschitz, above sqrt(c_star)={patch.bound:.9g}',
            report=patch)
    _log.debug('Patch with %d points and %d anchors: constant %.9g', table.n, len(anchors), constant)
    return patch


def _case_label(a: int, b: int) -> str:
    lo, hi = min(a, b), max(a, b)
    return {(0, 0): 'i', (1, 1): 'ii', (2, 2): 'iii', (0, 1): 'iv', (0, 2): 'v', (1, 2): 'vi'}[(lo, hi)]


def _drop_sources(pmap: PartialMap, rows: np.ndarray) -> np.ndarray:
    if not len(rows):
        return rows
    return rows[_pairwise(rows, pmap.sources).min(axis=1) > COINCIDENCE_TOL]


def verify_two_center_patch(pmap: PartialMap, xi: HPoint, xi2: HPoint, cfg: PipelineConfig,
                            samples: t.Sequence[HPoint]) -> TwoCenterReport:
    """
    Glue f with the epsilon-ball patches at two far-apart centers and check
    that the glued map is 1-Lipschitz, pair class by pair class.
    """
    d = distance(xi, xi2)
    if d < cfg.R - COINCIDENCE_TOL:
        raise PipelineError(f'Centers are {d:.6g} apart, closer than R={cfg.R:.6g}', stage='two-center')
    rows = _drop_sources(pmap, as_rows(samples))
    patches = []
    for center in (xi, xi2):
        if pmap.index_of(center.coords) is not None:
            raise PipelineError('Two-center check needs centers outside the source set', stage='two-center')
        ball = rows[_dist(center.coords, rows) <= cfg.epsilon] if len(rows) else rows
        patches.append(local_patch(pmap, center, cfg, ball))

    domain = np.vstack([pmap.sources] + [p.table.domain for p in patches])
    images = np.vstack([pmap.targets] + [p.table.images for p in patches])
    labels = np.concatenate([np.zeros(pmap.n, dtype=int)] +
                            [np.full(p.table.n, k + 1, dtype=int) for k, p in enumerate(patches)])

    iu, ju = np.triu_indices(len(domain), k=1)
    ratios = _pairwise(images)[iu, ju] / _pairwise(domain)[iu, ju]
    maxima = {case: 0.0 for case in CASES}
    witness = {case: (-1, -1) for case in CASES}
    for k in range(len(iu)):
        case = _case_label(labels[iu[k]], labels[ju[k]])
        if ratios[k] > maxima[case]:
            maxima[case] = float(ratios[k])
            witness[case] = (int(iu[k]), int(ju[k]))

    eta, eta2 = patches[0].solution.eta, patches[1].solution.eta
    gap_d = distance(eta, eta2)
    report = TwoCenterReport(case_maxima=maxima, case_witness=witness, eta_ratio=gap_d / d,
                             eta_bound=cfg.c_star + cfg.delta / cfg.R,
                             eta_gap=cfg.c_star * d + cfg.delta - gap_d, distance=d)
    for case in CASES:
        if maxima[case] > 1.0 + CERT_SLACK:
            report.failures.append(f'case ({case}): ratio {maxima[case]:.9g} > 1 at pair {witness[case]}')
    if report.eta_ratio > report.eta_bound + CERT_SLACK:
        report.failures.append(f'eta ratio {report.eta_ratio:.9g} above {report.eta_bound:.9g}')
    if report.eta_gap < -CERT_SLACK:
        report.failures.append(f'd(eta, eta\') exceeds c_star d + log 2 by {-report.eta_gap:.3e}')
    return report


def _clean_sample(pmap: PartialMap, rows: np.ndarray) -> np.ndarray:
    kept = _drop_sources(pmap, rows)
    if len(kept) < len(rows):
        _log.warning('Dropped %d sample point(s) coinciding with sources', len(rows) - len(kept))
    if len(kept) < 2:
        return kept
    close = _pairwise(kept) <= COINCIDENCE_TOL
    np.fill_diagonal(close, False)
    dup = np.triu(close).any(axis=0)
    if dup.any():
        _log.warning('Dropped %d duplicate sample point(s)', int(dup.sum()))
    return kept[~dup]


def _densify(samples: np.ndarray, centers: t.List[int], cfg: PipelineConfig) -> np.ndarray:
    if cfg.patch_samples == 0:
        return samples
    m = samples.shape[1] - 1
    extra = [sample_ball_rows(m, cfg.epsilon / 2.0, cfg.patch_samples,
                              np.random.default_rng([cfg.seed, k]), samples[k]) for k in centers]
    return np.vstack([samples] + extra)


def _extend_bin(job) -> np.ndarray:
    sources, targets, eval_points, placed_idx, placed_img, opts = job
    n = len(sources)
    images = np.empty_like(eval_points)
    placed = np.zeros(len(eval_points), dtype=bool)
    images[:n], placed[:n] = targets, True
    images[placed_idx], placed[placed_idx] = placed_img, True
    fj = PartialMap(eval_points[placed], images[placed], declared_C=1.0, validate=False)
    queue = np.flatnonzero(~placed)
    extended = sequential_extension(fj, eval_points[queue], opts)
    images[queue] = extended.targets[fj.n:]
    return images


def _map_bins(jobs: t.List[tuple], workers: int) -> t.List[np.ndarray]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_extend_bin, jobs))
    return [_extend_bin(job) for job in jobs]


def run_pipeline(pmap: PartialMap, domain_sample: t.Sequence[HPoint], cfg: PipelineConfig) -> ExtensionResult:
    if pmap.n >= 2:
        lip, pair = lipschitz_constant(pmap)
        if lip > cfg.C + 1e-9:
            raise PipelineError(f'Input map is {lip:.9g}-Lipschitz on pair {pair}, above C={cfg.C}',
                                stage='input')
    samples = _clean_sample(pmap, as_rows(domain_sample))
    if not len(samples):
        raise PipelineError('No usable sample points', stage='input')

    net = build_net(samples, cfg.epsilon, cfg.R)
    samples = _densify(samples, net.sample_indices, cfg)
    n = pmap.n
    eval_points = np.vstack([pmap.sources, samples])

    balls: t.List[np.ndarray] = []
    patches: t.List[Patch] = []
    for k, center in zip(net.sample_indices, net.center_points):
        near = np.flatnonzero(_dist(center.coords, samples) <= cfg.epsilon)
        order = np.concatenate([[k], near[near != k]])
        try:
            patches.append(local_patch(pmap, center, cfg, samples[order]))
        except CertificateError as error:
            raise PipelineError(str(error), stage='patch', report=error.report) from error
        balls.append(n + order)
    _log.info('Placed %d certified patches', len(patches))

    jobs = []
    for j in range(net.num_bins):
        members = net.bin_members(j)
        idx = np.concatenate([balls[i] for i in members])
        img = np.vstack([patches[i].table.images for i in members])
        jobs.append((pmap.sources, pmap.targets, eval_points, idx, img, cfg.solver))
    tables = [MapTable(eval_points, images, f'bin{j}') for j, images in
              enumerate(_map_bins(jobs, cfg.workers))]

    per_bin = []
    for j, table in enumerate(tables):
        value, pair = _max_ratio(table.domain, table.images)
        per_bin.append(value)
        if value > 1.0 + CERT_SLACK:
            raise PipelineError(f'Bin {j} extension is {value:.9g}-Lipschitz at pair {pair}', stage='bin',
                                report={'bin': j, 'constant': value, 'witness': pair, 'per_bin': per_bin})
        _log.info('Bin %d of %d: %d centers, constant %.9g', j + 1, net.num_bins, len(net.bin_members(j)), value)

    F = average_maps(tables)
    final, witness = _max_ratio(F.domain, F.images)
    shrink = 1.0 - cfg.sqrt_c_star
    c_emp = 1.0 - shrink / net.num_bins
    c_theo = 1.0 - shrink / net.theoretical_N

    per_ball = 0.0
    for ball in balls:
        if len(ball) >= 2:
            per_ball = max(per_ball, _max_ratio(F.domain[ball], F.images[ball])[0])

    result = ExtensionResult(eval_points=eval_points, images=F.images, per_bin_constants=per_bin,
                             final_constant=final, c_prime_empirical=c_emp, c_prime_theoretical=c_theo,
                             witness_pair=witness, c_star=cfg.c_star, net=net, num_sources=n,
                             per_ball_max=per_ball,
                             agrees_on_sources=bool(np.array_equal(F.images[:n], pmap.targets)))
    if not result.agrees_on_sources:
        result.failures.append('F differs from f on the source points')
    if per_ball > c_emp + CERT_SLACK:
        result.failures.append(f'net-ball constant {per_ball:.9g} above {c_emp:.9g}')
    if final > c_emp + CERT_SLACK:
        result.failures.append(f'final constant {final:.9g} above {c_emp:.9g} at pair {witness}')
    _log.info('Pipeline done: final constant %.9g, C\' empirical %.9g, theoretical %.9g',
              final, c_emp, c_theo)
    return result
