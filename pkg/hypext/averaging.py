"""
Pointwise geodesic averaging of maps into H^m.

f_t(x) is the point at fraction t along the geodesic from f0(x) to f1(x).
In nonpositive curvature Lip(f_t|Z) <= t Lip(f1|Z) + (1 - t) Lip(f0|Z) on
every subset Z, and points where the inputs agree are left untouched.
"""

import logging
import typing as t

from .errors import GeometryError
from .geometry import _geodesic_rows
from .models.maps import MapTable

_log = logging.getLogger('hypext.averaging')


def interpolate_maps(f0: MapTable, f1: MapTable, t: float) -> MapTable:
    if not 0.0 <= t <= 1.0:
        raise ValueError(f't must lie in [0, 1], got {t}')
    if not f0.same_domain(f1):
        raise GeometryError(f'Cannot interpolate {f0!r} and {f1!r}: domains differ')
    if t == 0.0:
        return MapTable(f0.domain, f0.images, f0.label)
    if t == 1.0:
        return MapTable(f1.domain, f1.images, f1.label)
    return MapTable(f0.domain, _geodesic_rows(f0.images, f1.images, t), f'{f0.label}~{f1.label}')


def average_maps(maps: t.Sequence[MapTable]) -> MapTable:
    """
    F_1 = f_1 and F_k = (1/k) f_k + ((k-1)/k) F_{k-1}. The result depends on
    the order of the maps for three or more.
    """
    if not maps:
        raise ValueError('Cannot average an empty list of maps')
    acc = maps[0]
    for k, f in enumerate(maps[1:], start=2):
        acc = interpolate_maps(acc, f, 1.0 / k)
    _log.debug('Averaged %d maps over %d points', len(maps), acc.n)
    return MapTable(acc.domain, acc.images, 'average')
