import typing as t

import numpy as np

from ..errors import GeometryError, SolverError
from .point import HPoint

PointsLike = t.Union[np.ndarray, t.Sequence[HPoint], t.Sequence[t.Sequence[float]]]

# Slack allowed on declared Lipschitz bounds and on point coincidence.
LIPSCHITZ_SLACK = 1e-9
COINCIDENCE_TOL = 1e-12


def as_rows(points: PointsLike) -> np.ndarray:
    """Stack HPoints (or raw coordinate rows) into a float (n, m+1) array."""
    if isinstance(points, np.ndarray):
        rows = np.array(points, dtype=float)
    else:
        rows = np.array([p.coords if isinstance(p, HPoint) else p for p in points], dtype=float)
    if rows.ndim == 1 and rows.size == 0:
        return rows.reshape(0, 0)
    if rows.ndim != 2:
        raise GeometryError(f'Expected a list of points, got array of shape {rows.shape}')
    return rows


class PartialMap:
    """
    Finite map sources[i] -> targets[i] between copies of H^m with a declared
    Lipschitz constant.
    """

    __slots__ = ('sources', 'targets', 'declared_C')

    def __init__(self, sources: PointsLike, targets: PointsLike, declared_C: float,
                 validate: bool = True) -> None:
        self.sources: np.ndarray = as_rows(sources)
        self.targets: np.ndarray = as_rows(targets)
        self.declared_C: float = float(declared_C)
        if validate:
            self.validate()

    def validate(self) -> None:
        from ..geometry import _pairwise

        n = self.sources.shape[0]
        if n < 1:
            raise SolverError('A partial map needs at least one point')
        if self.targets.shape != self.sources.shape:
            raise GeometryError(f'{self.sources.shape} sources vs {self.targets.shape} targets')
        if not self.declared_C > 0:
            raise SolverError(f'declared_C must be positive, got {self.declared_C}')
        if n < 2:
            return
        dx = _pairwise(self.sources)
        dy = _pairwise(self.targets)
        iu, ju = np.triu_indices(n, k=1)
        if dx[iu, ju].min() <= COINCIDENCE_TOL:
            raise SolverError('Source points must be pairwise distinct')
        excess = dy[iu, ju] - (self.declared_C * dx[iu, ju] + LIPSCHITZ_SLACK)
        if excess.max() > 0:
            k = int(np.argmax(excess))
            raise SolverError(
                f'Map is not {self.declared_C}-Lipschitz on pair ({iu[k]}, {ju[k]}): '
                f'excess {excess[k]:.3e}')

    @property
    def n(self) -> int:
        return self.sources.shape[0]

    @property
    def dimension(self) -> int:
        return self.sources.shape[1] - 1

    @property
    def source_points(self) -> t.List[HPoint]:
        return [HPoint(row, check=False) for row in self.sources]

    @property
    def target_points(self) -> t.List[HPoint]:
        return [HPoint(row, check=False) for row in self.targets]

    def index_of(self, point: np.ndarray) -> t.Optional[int]:
        """Index of the source coinciding with point, if any."""
        from ..geometry import _dist

        d = _dist(point, self.sources)
        k = int(np.argmin(d))
        return k if d[k] <= COINCIDENCE_TOL else None

    def extended(self, source: np.ndarray, target: np.ndarray, declared_C: t.Optional[float] = None) -> 'PartialMap':
        return PartialMap(np.vstack([self.sources, source]), np.vstack([self.targets, target]),
                          self.declared_C if declared_C is None else declared_C, validate=False)

    def restricted(self, indices: t.Sequence[int]) -> 'PartialMap':
        idx = np.asarray(indices, dtype=int)
        return PartialMap(self.sources[idx], self.targets[idx], self.declared_C, validate=False)

    def __repr__(self):
        return f'<PartialMap n={self.n} m={self.dimension} C={self.declared_C:g}>'


class MapTable:
    """
    A map given extensionally: images[i] is the image of domain[i].
    """

    __slots__ = ('domain', 'images', 'label')

    def __init__(self, domain: PointsLike, images: PointsLike, label: str = '') -> None:
        self.domain: np.ndarray = as_rows(domain)
        self.images: np.ndarray = as_rows(images)
        self.label: str = label
        if self.domain.shape != self.images.shape:
            raise GeometryError(f'{self.domain.shape} domain vs {self.images.shape} images in {label!r}')

    @property
    def n(self) -> int:
        return self.domain.shape[0]

    def same_domain(self, other: 'MapTable') -> bool:
        return self.domain.shape == other.domain.shape and bool(np.all(self.domain == other.domain))

    def restricted(self, indices: t.Sequence[int]) -> 'MapTable':
        idx = np.asarray(indices, dtype=int)
        return MapTable(self.domain[idx], self.images[idx], self.label)

    def __repr__(self):
        return f'<MapTable {self.label!r} n={self.n}>'
