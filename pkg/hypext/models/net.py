import typing as t
from dataclasses import dataclass

import numpy as np

from .point import HPoint


@dataclass
class Net:
    """
    Maximal epsilon-sparse subset of a sample, split into bins whose members
    are pairwise at least R apart.
    """

    centers: np.ndarray
    epsilon: float
    R: float
    bin_of: t.List[int]
    num_bins: int
    theoretical_N: int
    sample_indices: t.List[int]

    @property
    def center_points(self) -> t.List[HPoint]:
        return [HPoint(row, check=False) for row in self.centers]

    def bin_members(self, j: int) -> t.List[int]:
        return [i for i, b in enumerate(self.bin_of) if b == j]

    def __repr__(self):
        return (f'<Net centers={len(self.centers)} eps={self.epsilon:.4g} R={self.R:.4g} '
                f'bins={self.num_bins} N={self.theoretical_N}>')
