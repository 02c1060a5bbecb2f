"""
Epsilon-nets of a finite sample and their R-separated binning.
"""

import logging
import math
import sys
import typing as t

import networkx as nx
import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

from .geometry import _dist, _pairwise
from .models.maps import as_rows
from .models.net import Net
from .models.point import HPoint

_log = logging.getLogger('hypext.covering')


def _greedy_indices(rows: np.ndarray, epsilon: float) -> t.List[int]:
    picked: t.List[int] = []
    for k, row in enumerate(rows):
        if not picked or _dist(row, rows[picked]).min() >= epsilon:
            picked.append(k)
    return picked


def greedy_net(domain_sample: t.Sequence[HPoint], epsilon: float) -> t.List[HPoint]:
    """First-come subsequence of the sample, pairwise >= epsilon apart and covering it."""
    if epsilon <= 0:
        raise ValueError(f'epsilon must be positive, got {epsilon}')
    rows = as_rows(domain_sample)
    if rows.size == 0:
        raise ValueError('Cannot build a net of an empty sample')
    return [HPoint(rows[k], check=False) for k in _greedy_indices(rows, epsilon)]


def _in_order(graph: nx.Graph, colors: dict) -> t.List[int]:
    return sorted(graph)


def assign_bins(centers: t.Sequence[HPoint], R: float) -> t.List[int]:
    """
    First-fit colouring of the graph joining centers closer than R, visiting
    centers in input order. Same-coloured centers are pairwise >= R apart.
    """
    if R <= 0:
        raise ValueError(f'R must be positive, got {R}')
    rows = as_rows(centers)
    n = rows.shape[0]
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    if n > 1:
        close = _pairwise(rows) < R
        iu, ju = np.triu_indices(n, k=1)
        hit = close[iu, ju]
        graph.add_edges_from(zip(iu[hit].tolist(), ju[hit].tolist()))
    coloring = nx.greedy_color(graph, strategy=_in_order)
    return [coloring[i] for i in range(n)]


def _ball_volume_h(m: int, rho: float) -> float:
    if m == 2:
        return 2.0 * math.pi * (math.cosh(rho) - 1.0)
    if m == 3:
        return math.pi * (math.sinh(2.0 * rho) - 2.0 * rho)
    sphere = 2.0 * math.pi ** (m / 2.0) / gamma(m / 2.0)
    integral, _ = quad(lambda s: math.sinh(s) ** (m - 1), 0.0, rho, epsrel=1e-10)
    return sphere * integral


def _ball_volume_e(m: int, rho: float) -> float:
    return math.pi ** (m / 2.0) / gamma(m / 2.0 + 1.0) * rho ** m


def volume_bound_N(m: int, R: float, epsilon: float) -> int:
    """Most epsilon-separated points a ball of radius R can hold, by comparing volumes."""
    if m < 1:
        raise ValueError(f'dimension must be positive, got {m}')
    try:
        ratio = _ball_volume_h(m, R + epsilon / 2.0) / _ball_volume_e(m, epsilon / 2.0)
    except OverflowError:
        _log.warning('Ball volume overflows for m=%d R=%.6g; reporting N as sys.maxsize', m, R)
        return sys.maxsize
    if not math.isfinite(ratio):
        return sys.maxsize
    return int(math.ceil(ratio - 1e-9))


def build_net(domain_sample: t.Sequence[HPoint], epsilon: float, R: float) -> Net:
    rows = as_rows(domain_sample)
    if rows.size == 0:
        raise ValueError('Cannot build a net of an empty sample')
    if not R > epsilon:
        raise ValueError(f'R={R} must exceed epsilon={epsilon}')
    picked = _greedy_indices(rows, epsilon)
    centers = rows[picked]
    bins = assign_bins(centers, R)
    net = Net(centers=centers, epsilon=epsilon, R=R, bin_of=bins, num_bins=max(bins) + 1,
              theoretical_N=volume_bound_N(rows.shape[1] - 1, R, epsilon), sample_indices=picked)
    _log.info('Net of %d centers from %d samples in %d bins (volume bound %d)',
              len(picked), len(rows), net.num_bins, net.theoretical_N)
    return net
