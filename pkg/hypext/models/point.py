import typing as t

import numpy as np

from ..errors import GeometryError

# Points drift by roundoff proportional to x0**2, so the hyperboloid check is relative.
HYPERBOLOID_TOL = 1e-9


def _mink(u: np.ndarray, v: np.ndarray) -> float:
    return float(-u[0] * v[0] + np.dot(u[1:], v[1:]))


class SpaceConfig:
    """
    Dimension and curvature of the model space H^m. Source and target spaces
    share one config; curvature is fixed at -1.
    """

    __slots__ = ('dimension', 'curvature')

    def __init__(self, dimension: int, curvature: float = -1.0) -> None:
        if int(dimension) != dimension or dimension < 1:
            raise GeometryError(f'Dimension must be a positive integer, got {dimension}')
        if curvature != -1.0:
            raise GeometryError(f'Only curvature -1 is supported, got {curvature}')
        self.dimension: int = int(dimension)
        self.curvature: float = -1.0

    @property
    def ambient(self) -> int:
        return self.dimension + 1

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SpaceConfig) and other.dimension == self.dimension

    def __hash__(self) -> int:
        return hash(('H', self.dimension))

    def __repr__(self):
        return f'<SpaceConfig m={self.dimension} curvature={self.curvature}>'


class HPoint:
    """
    Point on the upper sheet of the hyperboloid <x,x>_M = -1.
    """

    __slots__ = ('coords',)

    def __init__(self, coords: t.Sequence[float], check: bool = True) -> None:
        arr = np.array(coords, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise GeometryError(f'HPoint needs an (m+1)-vector with m >= 1, got shape {arr.shape}')
        if check:
            drift = abs(_mink(arr, arr) + 1.0)
            if arr[0] <= 0 or drift > HYPERBOLOID_TOL * max(1.0, arr[0] ** 2):
                raise GeometryError(f'Coordinates {arr.tolist()} are off the hyperboloid (drift {drift:.3e})')
        arr.setflags(write=False)
        self.coords: np.ndarray = arr

    @classmethod
    def origin(cls, dimension: int) -> 'HPoint':
        coords = np.zeros(dimension + 1)
        coords[0] = 1.0
        return cls(coords, check=False)

    @classmethod
    def from_spatial(cls, spatial: t.Sequence[float]) -> 'HPoint':
        """Lift spatial coordinates (x_1..x_m) onto the hyperboloid."""
        spatial = np.asarray(spatial, dtype=float)
        return cls(np.concatenate(([np.sqrt(1.0 + spatial @ spatial)], spatial)), check=False)

    @property
    def dimension(self) -> int:
        return self.coords.size - 1

    def __repr__(self):
        return f'<HPoint {np.array2string(self.coords, precision=6)}>'


class TangentVec:
    """
    Tangent vector at base, stored in ambient coordinates (Minkowski-orthogonal to base).
    """

    __slots__ = ('base', 'vec')

    def __init__(self, base: HPoint, vec: t.Sequence[float], check: bool = True) -> None:
        arr = np.array(vec, dtype=float)
        if arr.shape != base.coords.shape:
            raise GeometryError(f'Tangent vector shape {arr.shape} does not match base {base.coords.shape}')
        if check:
            scale = max(1.0, float(np.abs(arr).max()) * float(base.coords[0]))
            if abs(_mink(base.coords, arr)) > HYPERBOLOID_TOL * scale:
                raise GeometryError('Vector is not tangent to the hyperboloid at its base')
        arr.setflags(write=False)
        self.base: HPoint = base
        self.vec: np.ndarray = arr

    @property
    def norm(self) -> float:
        return float(np.sqrt(max(_mink(self.vec, self.vec), 0.0)))

    def __repr__(self):
        return f'<TangentVec |v|={self.norm:.6g} at {self.base!r}>'
