"""
Uniform sampling of hyperbolic balls.

Radii follow the density sinh^{m-1}(rho) on [0, radius] (exact inverse CDF
for m = 2, rejection otherwise) and directions are normalized Gaussians.
Balls around a center other than the origin are obtained by a Lorentz boost.
"""

import typing as t

import numpy as np

from .geometry import _boost, _renormalize
from .models.point import HPoint


def _radii(m: int, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    if m == 1:
        return rng.uniform(0.0, radius, count)
    if m == 2:
        u = rng.uniform(0.0, 1.0, count)
        return np.arccosh(1.0 + u * (np.cosh(radius) - 1.0))
    out = np.empty(0)
    top = np.sinh(radius) ** (m - 1)
    while out.size < count:
        rho = rng.uniform(0.0, radius, 4 * count)
        keep = rng.uniform(0.0, top, rho.size) < np.sinh(rho) ** (m - 1)
        out = np.concatenate([out, rho[keep]])
    return out[:count]


def sample_ball_rows(m: int, radius: float, count: int, rng: np.random.Generator,
                     center: t.Optional[np.ndarray] = None) -> np.ndarray:
    rho = _radii(m, radius, count, rng)
    dirs = rng.standard_normal((count, m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    rows = np.hstack([np.cosh(rho)[:, None], np.sinh(rho)[:, None] * dirs])
    if center is not None:
        rows = _renormalize(rows @ _boost(np.asarray(center, dtype=float)).T)
    return rows


def sample_ball(m: int, radius: float, count: int, rng: np.random.Generator,
                center: t.Optional[HPoint] = None) -> t.List[HPoint]:
    """count points uniformly distributed in B(center, radius), center defaulting to the origin."""
    rows = sample_ball_rows(m, radius, count, rng, None if center is None else center.coords)
    return [HPoint(row, check=False) for row in rows]


def point_at(center: np.ndarray, direction: np.ndarray, rho: float) -> np.ndarray:
    """The point at distance rho from center along the unit frame direction."""
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    row = np.concatenate([[np.cosh(rho)], np.sinh(rho) * direction])
    return _renormalize(_boost(np.asarray(center, dtype=float)) @ row)[0]
