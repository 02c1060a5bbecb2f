"""
One-point extension of a finite Lipschitz map.

Given f: X' -> Y and a new point xi, the optimal image minimizes
phi(y) = max_i d(y, f(x_i)) / d(xi, x_i). phi is a maximum of geodesically
convex functions. The solver first polishes the start point directly by
solving the epigraph form (min t s.t. d(y, f(x_i)) <= t d(xi, x_i)) with
SLSQP in the tangent chart at the incumbent, restricted to the largest
ratios and re-centering the chart each round; it stops as soon as the
incumbent passes the hull test. When that stalls it falls back to a
diminishing-step subgradient descent followed by the same polish.

The same minimax core drives the flat tangent-chart extensions used for local
patches (see `chart_extension`).
"""

import logging
import typing as t

import numpy as np
from scipy.optimize import minimize, nnls

from .config import SolverOptions
from .errors import ConvergenceError, GeometryError, SolverError
from .geometry import Euclidean, Hyperboloid, _dist, _max_ratio, angle
from .models.maps import MapTable, PartialMap, as_rows
from .models.point import HPoint
from .models.solution import HullCertificate, ObtuseChoice, OnePointSolution

_log = logging.getLogger('hypext.solver')

# Weight of the sum-to-one row in the NNLS certificate.
_SUM_WEIGHT = 1e3

# Constraints below this fraction of the incumbent value are left out of a polish round.
_POLISH_KEEP = 0.5

# Upper bound on the constraints handed to one polish round.
_WORKING_SET = 16

# Relative decrease that counts as progress for the subgradient patience counter.
_SUBGRADIENT_GAIN = 1e-6

Space = t.Union[Hyperboloid, Euclidean]


def _active_mask(ratios: np.ndarray, value: float, active_tol: float) -> np.ndarray:
    return ratios >= value - active_tol * max(value, 1.0)


def _subgradient(space: Space, y: np.ndarray, targets: np.ndarray, lengths: np.ndarray,
                 opts: SolverOptions) -> t.Tuple[np.ndarray, float, int]:
    ratios = space.distances(y, targets) / lengths
    best_y, best = y, float(ratios.max())
    spread = float(np.mean(space.distances(y, targets)))
    if spread == 0.0:
        return best_y, best, 0

    step0 = 0.1 * spread
    stall = 0
    k = 0
    for k in range(1, opts.max_iters + 1):
        value = float(ratios.max())
        active = _active_mask(ratios, value, opts.active_tol)
        basis = space.basis(y)
        dirs = space.coords(y, basis, targets[active])
        norms = np.linalg.norm(dirs, axis=1)
        moving = norms > 1e-15
        if not moving.any():
            break
        g = (dirs[moving] / norms[moving, None]).mean(axis=0)
        if np.linalg.norm(g) < 1e-15:
            break
        y = space.exp(y, basis, (step0 / np.sqrt(k)) * g)
        ratios = space.distances(y, targets) / lengths
        value = float(ratios.max())
        if value < best - _SUBGRADIENT_GAIN * best:
            stall = 0
        else:
            stall += 1
        if value < best:
            best_y, best = y, value
        if stall >= opts.patience:
            break

    _log.debug('Subgradient phase stopped after %d iterations at %.12g', k, best)
    return best_y, best, k


def _polish_round(space: Space, y: np.ndarray, value: float, targets: np.ndarray,
                  lengths: np.ndarray, keep: np.ndarray) -> np.ndarray:
    basis = space.basis(y)
    ys, ls = targets[keep], lengths[keep]
    m = basis.shape[1]
    reach = float(space.distances(y, ys).max()) + 1.0
    last: t.Dict[str, t.Any] = {}

    def evaluate(w):
        # shared by constraint and constraint_jac
        if last.get('w') is None or not np.array_equal(last['w'], w):
            last['w'] = w.copy()
            last['d'], last['grad'] = space.dist_and_grad(y, basis, w, ys)
        return last['d'], last['grad']

    def constraint(z):
        d, _ = evaluate(z[:m])
        return z[m] - d / ls

    def constraint_jac(z):
        _, grad = evaluate(z[:m])
        return np.hstack([-grad / ls[:, None], np.ones((len(ls), 1))])

    unit = np.zeros(m + 1)
    unit[m] = 1.0
    res = minimize(
        lambda z: z[m], np.concatenate([np.zeros(m), [value]]), jac=lambda z: unit,
        method='SLSQP',
        constraints=[{'type': 'ineq', 'fun': constraint, 'jac': constraint_jac}],
        bounds=[(-reach, reach)] * m + [(0.0, None)],
        options={'ftol': 1e-16, 'maxiter': 200})
    return space.exp(y, basis, res.x[:m])


def _working_set(ratios: np.ndarray, value: float) -> np.ndarray:
    """Constraints within _POLISH_KEEP of the incumbent, capped at the _WORKING_SET largest."""
    keep = ratios >= _POLISH_KEEP * value
    if keep.sum() > _WORKING_SET:
        keep = np.zeros_like(keep)
        keep[np.argpartition(-ratios, _WORKING_SET - 1)[:_WORKING_SET]] = True
    return keep


def _stationary(space: Space, y: np.ndarray, value: float, lengths: np.ndarray, targets: np.ndarray,
                opts: SolverOptions) -> bool:
    """Hull test at y: some convex combination of unit directions to the active targets vanishes."""
    if value == 0.0:
        return True
    ratios = space.distances(y, targets) / lengths
    active = _active_mask(ratios, value, opts.active_tol)
    if active.sum() < 2:
        return False
    _, norm = _min_norm_combination(_unit_directions(space, y, targets[active]))
    return norm <= opts.certificate_tol


def _polish(space: Space, lengths: np.ndarray, targets: np.ndarray, y: np.ndarray, value: float,
            opts: SolverOptions, certify: bool = False):
    """
    Epigraph rounds re-centered at the incumbent. With certify set, stops as
    soon as the incumbent passes the hull test. Returns (y, value, rounds, residual, done).
    """
    residual = np.inf
    rounds = 0
    for rounds in range(1, opts.polish_rounds + 1):
        ratios = space.distances(y, targets) / lengths
        keep = _working_set(ratios, value)
        candidate = _polish_round(space, y, value, targets, lengths, keep)
        new = float((space.distances(candidate, targets) / lengths).max())
        if new >= value and not keep.all():
            candidate = _polish_round(space, y, value, targets, lengths, np.ones_like(keep))
            new = float((space.distances(candidate, targets) / lengths).max())
        gain = value - new
        if new < value:
            y, value = candidate, new
        if gain <= opts.tol:
            residual = max(gain, 0.0)
            return y, value, rounds, float(residual), True
        residual = gain
        if certify and _stationary(space, y, value, lengths, targets, opts):
            return y, value, rounds, 0.0, True
    return y, value, rounds, float(residual), False


def _solve_minimax(space: Space, lengths: np.ndarray, targets: np.ndarray, init: np.ndarray,
                   opts: SolverOptions):
    """Minimize max_i d(y, targets_i) / lengths_i. Returns (y, value, iterations, residual, converged)."""
    if opts.polish_first:
        value = float((space.distances(init, targets) / lengths).max())
        if value == 0.0:
            return init, 0.0, 0, 0.0, True
        y, value, rounds, residual, done = _polish(space, lengths, targets, init, value, opts, certify=True)
        if done and _stationary(space, y, value, lengths, targets, opts):
            return y, value, rounds, residual, True
        _log.debug('Polish from the start point stalled at %.12g; running the subgradient phase', value)

    y, value, iterations = _subgradient(space, init, targets, lengths, opts)
    if value == 0.0:
        return y, 0.0, iterations, 0.0, True
    y, value, rounds, residual, done = _polish(space, lengths, targets, y, value, opts)
    return y, value, iterations + rounds, residual, done


def _min_norm_combination(dirs: np.ndarray) -> t.Tuple[np.ndarray, float]:
    """Nonnegative weights summing to one that minimize |sum_i w_i dirs_i|."""
    k = dirs.shape[0]
    if k == 1:
        return np.ones(1), float(np.linalg.norm(dirs[0]))
    a = np.vstack([dirs.T, _SUM_WEIGHT * np.ones((1, k))])
    b = np.concatenate([np.zeros(dirs.shape[1]), [_SUM_WEIGHT]])
    weights, _ = nnls(a, b)
    total = weights.sum()
    weights = weights / total if total > 0 else np.full(k, 1.0 / k)
    return weights, float(np.linalg.norm(dirs.T @ weights))


def _unit_directions(space: Space, y: np.ndarray, targets: np.ndarray) -> np.ndarray:
    dirs = space.coords(y, space.basis(y), targets)
    norms = np.linalg.norm(dirs, axis=1)
    return dirs / np.where(norms > 0, norms, 1.0)[:, None]


def _lengths_to(pmap: PartialMap, xi: HPoint) -> np.ndarray:
    if xi.dimension != pmap.dimension:
        raise GeometryError(f'xi lives in H^{xi.dimension}, the map in H^{pmap.dimension}')
    return _dist(xi.coords, pmap.sources)


def eval_phi(pmap: PartialMap, xi: HPoint, y: HPoint) -> float:
    lengths = _lengths_to(pmap, xi)
    if lengths.min() <= 1e-12:
        raise SolverError('phi is undefined when xi coincides with a source point')
    return float((_dist(y.coords, pmap.targets) / lengths).max())


def solve_one_point(pmap: PartialMap, xi: HPoint, opts: t.Optional[SolverOptions] = None,
                    init: t.Optional[HPoint] = None, strict: bool = False) -> OnePointSolution:
    """
    Minimize phi_xi over H^m. A solve that runs out of iterations or polish
    rounds is returned with converged=False unless strict is set, in which
    case ConvergenceError is raised.
    """
    opts = opts or SolverOptions()
    if pmap.n < 1:
        raise SolverError('Cannot extend an empty map')
    lengths = _lengths_to(pmap, xi)

    hit = pmap.index_of(xi.coords)
    if hit is not None:
        return OnePointSolution(xi=xi, eta=HPoint(pmap.targets[hit], check=False), c_xi=pmap.declared_C,
                                active_indices=[hit], hull_weights=[1.0], iterations=0,
                                residual=0.0, on_source=True)

    space = Hyperboloid(pmap.dimension)
    start = pmap.targets[int(np.argmin(lengths))] if init is None else init.coords
    y, value, iterations, residual, converged = _solve_minimax(space, lengths, pmap.targets, start, opts)
    if not converged and strict:
        raise ConvergenceError(f'One-point solve stopped at residual {residual:.3e} above tol {opts.tol:.1e}')
    if not converged:
        _log.warning('One-point solve did not converge: c_xi=%.12g residual=%.3e after %d iterations',
                     value, residual, iterations)

    ratios = _dist(y, pmap.targets) / lengths
    active = np.flatnonzero(_active_mask(ratios, value, opts.active_tol))
    if value > 0:
        weights, norm = _min_norm_combination(_unit_directions(space, y, pmap.targets[active]))
    else:
        weights, norm = np.full(len(active), 1.0 / len(active)), 0.0

    return OnePointSolution(xi=xi, eta=HPoint(y, check=False), c_xi=value,
                            active_indices=active.tolist(), hull_weights=weights.tolist(),
                            iterations=iterations, residual=residual, converged=converged,
                            certificate_norm=norm)


def certify_hull(sol: OnePointSolution, pmap: PartialMap,
                 opts: t.Optional[SolverOptions] = None) -> HullCertificate:
    """
    Check first-order optimality of sol.eta: some convex combination of the unit
    directions towards the active targets (recomputed at eta) must vanish.
    The directions are normalized, so the norm compared against
    certificate_tol is dimensionless and needs no scaling by target distance.
    """
    opts = opts or SolverOptions()
    if sol.on_source:
        return HullCertificate(True, 0.0, list(sol.active_indices), [1.0], sol.c_xi, trivial=True)

    lengths = _lengths_to(pmap, sol.xi)
    ratios = _dist(sol.eta.coords, pmap.targets) / lengths
    value = float(ratios.max())
    active = np.flatnonzero(_active_mask(ratios, value, opts.active_tol))
    if value <= 1e-15:
        return HullCertificate(True, 0.0, active.tolist(), [1.0 / len(active)] * len(active), value,
                               trivial=True)

    space = Hyperboloid(pmap.dimension)
    weights, norm = _min_norm_combination(_unit_directions(space, sol.eta.coords, pmap.targets[active]))
    if len(active) == 1:
        return HullCertificate(False, norm, active.tolist(), [1.0], value,
                               reason='minimality violation: a single active constraint with c_xi > 0')
    passed = norm <= opts.certificate_tol
    return HullCertificate(passed, norm, active.tolist(), weights.tolist(), value,
                           reason='' if passed else f'convex combination norm {norm:.3e} above tolerance')


def obtuse_pair(sol: OnePointSolution, pmap: PartialMap, reference: HPoint) -> ObtuseChoice:
    """Active index j whose target makes an angle >= pi/2 with reference, seen from eta."""
    best = ObtuseChoice(index=-1, angle=-1.0, certified=False)
    for j in sol.active_indices:
        target = HPoint(pmap.targets[j], check=False)
        if _dist(target.coords, sol.eta.coords) <= 1e-15:
            continue
        theta = angle(sol.eta, reference, target)
        if theta > best.angle:
            best = ObtuseChoice(index=int(j), angle=theta, certified=False)
    if best.index < 0:
        raise SolverError('No active target is distinct from eta')
    best.certified = best.angle >= np.pi / 2 - 1e-6
    if not best.certified:
        _log.warning('No obtuse active target: best angle %.9f at index %d', best.angle, best.index)
    return best


def sequential_extension(pmap: PartialMap, queue: t.Sequence[HPoint],
                         opts: t.Optional[SolverOptions] = None) -> PartialMap:
    """Place queue points one at a time at their optimal image relative to everything placed so far."""
    opts = opts or SolverOptions()
    rows = as_rows(queue)
    if rows.size == 0:
        return pmap

    current = pmap
    for row in rows:
        xi = HPoint(row, check=False)
        if current.index_of(row) is not None:
            _log.warning('Queue point %s already placed; skipping', row.tolist())
            continue
        sol = solve_one_point(current, xi, opts)
        current = current.extended(row, sol.eta.coords)

    value = _max_ratio(current.sources, current.targets)[0] if current.n >= 2 else 0.0
    return PartialMap(current.sources, current.targets, value if value > 0 else pmap.declared_C,
                      validate=False)


def lipschitz_constant(pmap: t.Union[PartialMap, MapTable]) -> t.Tuple[float, t.Tuple[int, int]]:
    sources = pmap.sources if isinstance(pmap, PartialMap) else pmap.domain
    targets = pmap.targets if isinstance(pmap, PartialMap) else pmap.images
    if sources.shape[0] < 2:
        raise SolverError('The Lipschitz constant needs at least two points')
    try:
        return _max_ratio(sources, targets)
    except GeometryError as error:
        raise SolverError(str(error)) from error


def chart_extension(sources: np.ndarray, targets: np.ndarray, queue: np.ndarray,
                    opts: t.Optional[SolverOptions] = None) -> np.ndarray:
    """
    Flat analogue of `sequential_extension` on chart coordinates: each queue
    point is sent to the minimizer of max_i |y - b_i| / |p - a_i| over all
    points placed so far, which by Kirszbraun's theorem never raises the
    Lipschitz constant.
    """
    opts = opts or SolverOptions()
    space = Euclidean(sources.shape[1])
    srcs, tgts = [row for row in sources], [row for row in targets]
    out = np.empty((len(queue), sources.shape[1]))
    for k, p in enumerate(queue):
        a = np.asarray(srcs)
        lengths = np.linalg.norm(a - p, axis=1)
        hit = int(np.argmin(lengths))
        if lengths[hit] <= 1e-12:
            out[k] = tgts[hit]
            continue
        b = np.asarray(tgts)
        y, _, _, _, _ = _solve_minimax(space, lengths, b, b[hit], opts)
        out[k] = y
        srcs.append(p)
        tgts.append(y)
    return out
