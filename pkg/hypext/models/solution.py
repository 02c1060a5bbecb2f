import typing as t
from dataclasses import dataclass, field

import numpy as np

from .point import HPoint


@dataclass
class OnePointSolution:
    """Optimal image eta of xi, the optimal constant c_xi and its active set."""

    xi: HPoint
    eta: HPoint
    c_xi: float
    active_indices: t.List[int]
    hull_weights: t.List[float]
    iterations: int
    residual: float
    converged: bool = True
    certificate_norm: float = 0.0
    on_source: bool = False

    def ratios(self, sources: np.ndarray, targets: np.ndarray) -> np.ndarray:
        from ..geometry import _dist

        return _dist(self.eta.coords, targets) / _dist(self.xi.coords, sources)

    def as_dict(self) -> dict:
        return {
            'xi': self.xi.coords.tolist(),
            'eta': self.eta.coords.tolist(),
            'c_xi': self.c_xi,
            'active_indices': list(self.active_indices),
            'hull_weights': list(self.hull_weights),
            'iterations': self.iterations,
            'residual': self.residual,
            'converged': self.converged,
            'certificate_norm': self.certificate_norm,
        }


@dataclass
class HullCertificate:
    """Best convex combination of unit directions from eta towards the active targets."""

    passed: bool
    norm: float
    active_indices: t.List[int]
    weights: t.List[float]
    c_xi: float
    trivial: bool = False
    reason: str = ''


@dataclass
class ObtuseChoice:
    index: int
    angle: float
    certified: bool


@dataclass
class BoundsReport:
    C: float
    r_star: float
    c_hat: float
    arcsinh_value: float
    c_star: float
    delta: float = field(default=float(np.log(2.0)))
