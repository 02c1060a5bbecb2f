import typing as t
from dataclasses import dataclass, field

import numpy as np

from .maps import MapTable
from .net import Net
from .solution import OnePointSolution

CASES = ('i', 'ii', 'iii', 'iv', 'v', 'vi')


@dataclass
class Patch:
    """Local extension around a net center, certified on its ball sample."""

    xi: np.ndarray
    solution: OnePointSolution
    table: MapTable
    anchors: t.List[int]
    constant: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.constant <= self.bound + 1e-6


@dataclass
class TwoCenterReport:
    case_maxima: t.Dict[str, float]
    case_witness: t.Dict[str, t.Tuple[int, int]]
    eta_ratio: float
    eta_bound: float
    eta_gap: float
    distance: float
    failures: t.List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass
class ExtensionResult:
    eval_points: np.ndarray
    images: np.ndarray
    per_bin_constants: t.List[float]
    final_constant: float
    c_prime_empirical: float
    c_prime_theoretical: float
    witness_pair: t.Tuple[int, int]
    c_star: float
    net: Net
    num_sources: int
    per_ball_max: float
    agrees_on_sources: bool
    failures: t.List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (not self.failures and self.agrees_on_sources
                and self.final_constant <= self.c_prime_empirical + 1e-6)
