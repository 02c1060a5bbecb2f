"""
Exact-formula geometry of H^m in the hyperboloid model.

Points are float rows (x0, x1, ..., xm) on the upper sheet of <x,x>_M = -1,
with the Minkowski pairing <u,v>_M = -u0 v0 + sum_i ui vi. The public
functions take and return HPoint / TangentVec values; the underscored array
helpers work on stacked rows and are what the solvers use internally.

Distances switch between two closed forms: 2 asinh(|x - y|_M / 2) for nearby
points (no cancellation near arccosh(1)) and arccosh(-<x,y>_M) otherwise. Both
are the clamped arccosh of the textbook formula, evaluated stably.
"""

import logging
import typing as t

import numpy as np

from .errors import GeometryError
from .models.point import HPoint, SpaceConfig, TangentVec

_log = logging.getLogger('hypext.geometry')

LN2 = float(np.log(2.0))

# Above this relative drift a point is considered corrupted rather than rounded.
RENORMALIZE_LIMIT = 1e-6

# -<x,y>_M below this uses the asinh form of the distance.
_NEAR = 2.0


def _mink(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return -u[..., 0] * v[..., 0] + np.sum(u[..., 1:] * v[..., 1:], axis=-1)


def _signature(n: int) -> np.ndarray:
    sig = np.ones(n)
    sig[0] = -1.0
    return sig


def _dist(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Broadcasting distance between rows of x and rows of y."""
    q = -_mink(x, y)
    diff = x - y
    chord2 = np.maximum(_mink(diff, diff), 0.0)
    near = 2.0 * np.arcsinh(np.sqrt(chord2) / 2.0)
    far = np.arccosh(np.maximum(q, 1.0))
    return np.where(q < _NEAR, near, far)


def _pairwise(xs: np.ndarray, ys: t.Optional[np.ndarray] = None) -> np.ndarray:
    ys = xs if ys is None else ys
    out = _dist(xs[:, None, :], ys[None, :, :])
    if ys is xs:
        np.fill_diagonal(out, 0.0)
    return out


def _sinhc(x: np.ndarray) -> np.ndarray:
    """sinh(x)/x with the removable singularity filled in."""
    x = np.asarray(x, dtype=float)
    safe = np.where(np.abs(x) < 1e-8, 1.0, x)
    return np.where(np.abs(x) < 1e-8, 1.0 + x * x / 6.0, np.sinh(safe) / safe)


def _renormalize(points: np.ndarray) -> np.ndarray:
    """Project rows back onto the hyperboloid by recomputing x0 from the spatial part."""
    points = np.atleast_2d(points)
    spatial = points[:, 1:]
    x0 = np.sqrt(1.0 + np.sum(spatial * spatial, axis=1))
    drift = np.abs(points[:, 0] - x0) / x0
    worst = float(drift.max()) if drift.size else 0.0
    if worst > RENORMALIZE_LIMIT:
        raise GeometryError(f'Point drifted {worst:.3e} off the hyperboloid; refusing to renormalize')
    if worst > 1e-10:
        _log.debug('Renormalized %d point(s), worst relative drift %.3e', len(points), worst)
    out = points.copy()
    out[:, 0] = x0
    return out


def _exp_rows(base: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """exp_base of each tangent row (ambient coordinates)."""
    vecs = np.atleast_2d(vecs)
    norms = np.sqrt(np.maximum(_mink(vecs, vecs), 0.0))
    out = np.cosh(norms)[:, None] * base + _sinhc(norms)[:, None] * vecs
    return _renormalize(out)


def _log_rows(base: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """log_base of each target row, as ambient tangent vectors at base."""
    targets = np.atleast_2d(targets)
    dist = _dist(base, targets)
    # t + <b,t> b written as (t - b) - (q - 1) b, with q - 1 = 2 sinh^2(d/2)
    qm1 = 2.0 * np.sinh(dist / 2.0) ** 2
    u = (targets - base) - qm1[:, None] * base
    u = u + _mink(u, base)[:, None] * base
    return (1.0 / _sinhc(dist))[:, None] * u


def _boost(p: np.ndarray) -> np.ndarray:
    """Lorentz boost taking the origin to p; columns 1..m are an orthonormal tangent frame at p."""
    p0, ps = p[0], p[1:]
    m = ps.size
    out = np.empty((m + 1, m + 1))
    out[0, 0] = p0
    out[0, 1:] = ps
    out[1:, 0] = ps
    out[1:, 1:] = np.eye(m) + np.outer(ps, ps) / (1.0 + p0)
    return out


def _tangent_basis(p: np.ndarray) -> np.ndarray:
    return _boost(p)[:, 1:]


def _log_sinh(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide='ignore', over='ignore'):
        big = x - LN2 + np.log1p(-np.exp(-2.0 * np.maximum(x, 1e-300)))
        small = np.log(np.sinh(np.minimum(x, 20.0)))
    return np.where(x > 20.0, big, small)


def _asinh_exp(log_z: np.ndarray) -> np.ndarray:
    """asinh(exp(log_z)) without overflow."""
    log_z = np.asarray(log_z, dtype=float)
    with np.errstate(over='ignore'):
        big = log_z + np.log1p(np.sqrt(1.0 + np.exp(-2.0 * np.maximum(log_z, 20.0))))
        small = np.arcsinh(np.exp(np.minimum(log_z, 20.0)))
    return np.where(log_z > 20.0, big, small)


def _check_pair(x: HPoint, y: HPoint) -> None:
    if x.dimension != y.dimension:
        raise GeometryError(f'Points live in H^{x.dimension} and H^{y.dimension}')


def mink_inner(u: t.Sequence[float], v: t.Sequence[float]) -> float:
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise GeometryError(f'Minkowski pairing needs equal-length vectors, got {u.shape} and {v.shape}')
    return float(_mink(u, v))


def distance(x: HPoint, y: HPoint) -> float:
    _check_pair(x, y)
    return float(_dist(x.coords, y.coords))


def exp_map(v: TangentVec) -> HPoint:
    return HPoint(_exp_rows(v.base.coords, v.vec)[0], check=False)


def log_map(base: HPoint, target: HPoint) -> TangentVec:
    _check_pair(base, target)
    return TangentVec(base, _log_rows(base.coords, target.coords)[0], check=False)


def angle(vertex: HPoint, a: HPoint, b: HPoint) -> float:
    """Angle at vertex between the geodesics towards a and b, in [0, pi]."""
    _check_pair(vertex, a)
    _check_pair(vertex, b)
    basis = _tangent_basis(vertex.coords)
    sig = _signature(vertex.coords.size)
    vecs = _log_rows(vertex.coords, np.vstack([a.coords, b.coords])) @ (sig[:, None] * basis)
    norms = np.linalg.norm(vecs, axis=1)
    if norms.min() < 1e-15:
        raise GeometryError('Angle is undefined when an endpoint coincides with the vertex')
    u, w = vecs[0] / norms[0], vecs[1] / norms[1]
    return float(2.0 * np.arctan2(np.linalg.norm(u - w), np.linalg.norm(u + w)))


def geodesic_point(a: HPoint, b: HPoint, t: float) -> HPoint:
    _check_pair(a, b)
    return HPoint(_geodesic_rows(a.coords[None, :], b.coords[None, :], t)[0], check=False)


def _geodesic_rows(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """Constant-speed interpolation row by row; rows with a == b come back bitwise unchanged."""
    same = np.all(a == b, axis=1)
    out = a.copy()
    moving = ~same
    if moving.any():
        base = a[moving]
        out[moving] = _exp_rows(base, t * _log_rows(base, b[moving]))
    return out


def d_theta(theta, l1, l2):
    """
    Distance between the endpoints of two segments of lengths l1, l2 leaving a
    common vertex at angle theta (hyperbolic law of cosines), written as
    2 asinh(sqrt(sinh^2((l1-l2)/2) + sinh(l1) sinh(l2) sin^2(theta/2)))
    so that it stays accurate for nearly collinear and for very long segments.
    """
    theta, l1, l2 = (np.asarray(v, dtype=float) for v in (theta, l1, l2))
    half = np.sin(theta / 2.0) ** 2
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        direct = 2.0 * np.arcsinh(np.sqrt(np.sinh((l1 - l2) / 2.0) ** 2 + np.sinh(l1) * np.sinh(l2) * half))
        log_a = 2.0 * _log_sinh(np.abs(l1 - l2) / 2.0)
        log_b = _log_sinh(l1) + _log_sinh(l2) + np.log(half)
        logged = 2.0 * _asinh_exp(0.5 * np.logaddexp(log_a, log_b))
    out = np.where(np.maximum(l1, l2) > 30.0, logged, direct)
    return float(out) if out.ndim == 0 else out


class Hyperboloid:
    """
    H^m as seen by the minimax solvers: tangent-chart coordinates in an
    orthonormal frame, exponential charts and distance gradients.
    """

    def __init__(self, dimension: int) -> None:
        self.config = SpaceConfig(dimension)
        self.dimension = self.config.dimension
        self._sig = _signature(self.config.ambient)

    def distances(self, y: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return _dist(y, ys)

    def basis(self, y: np.ndarray) -> np.ndarray:
        return _tangent_basis(y)

    def coords(self, y: np.ndarray, basis: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return _log_rows(y, ys) @ (self._sig[:, None] * basis)

    def exp(self, y: np.ndarray, basis: np.ndarray, w: np.ndarray) -> np.ndarray:
        return _exp_rows(y, basis @ w)[0]

    def dist_and_grad(self, y: np.ndarray, basis: np.ndarray, w: np.ndarray, ys: np.ndarray):
        """Distances from exp_y(w) to ys and their gradients in w."""
        z = self.exp(y, basis, w)
        d = _dist(z, ys)
        signed = ys * self._sig
        a0 = signed @ y
        a = signed @ basis
        s = float(np.linalg.norm(w))
        if s < 1e-12:
            inner = a
        else:
            u = w / s
            p = a @ u
            radial = np.sinh(s) * a0 + (np.cosh(s) - np.sinh(s) / s) * p
            inner = radial[:, None] * u[None, :] + (np.sinh(s) / s) * a
        sh = np.sinh(d)
        grad = np.where((d > 1e-12)[:, None], -inner / np.where(sh > 0, sh, 1.0)[:, None], 0.0)
        return d, grad


class Euclidean:
    """Flat R^m with the same interface, used for tangent-chart extensions."""

    def __init__(self, dimension: int) -> None:
        self.dimension = dimension

    def distances(self, y: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return np.linalg.norm(ys - y, axis=-1)

    def basis(self, y: np.ndarray) -> np.ndarray:
        return np.eye(self.dimension)

    def coords(self, y: np.ndarray, basis: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return np.atleast_2d(ys - y)

    def exp(self, y: np.ndarray, basis: np.ndarray, w: np.ndarray) -> np.ndarray:
        return y + w

    def dist_and_grad(self, y: np.ndarray, basis: np.ndarray, w: np.ndarray, ys: np.ndarray):
        diff = (y + w) - ys
        d = np.linalg.norm(diff, axis=1)
        grad = np.where((d > 1e-15)[:, None], diff / np.where(d > 0, d, 1.0)[:, None], 0.0)
        return d, grad


def _max_ratio(xs: np.ndarray, ys: np.ndarray, tol: float = 1e-12):
    """
    Largest d(ys_i, ys_j) / d(xs_i, xs_j) over i < j, with its pair. Ties go to
    the lowest index pair in row-major order.
    """
    n = xs.shape[0]
    if n < 2:
        return 0.0, (0, 0)
    dx = _pairwise(xs)
    dy = _pairwise(ys)
    iu, ju = np.triu_indices(n, k=1)
    den = dx[iu, ju]
    if den.min() <= tol:
        k = int(np.argmin(den))
        raise GeometryError(f'Duplicate domain points {iu[k]} and {ju[k]}')
    ratios = dy[iu, ju] / den
    k = int(np.argmax(ratios))
    return float(ratios[k]), (int(iu[k]), int(ju[k]))
