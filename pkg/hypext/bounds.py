"""
Closed-form constants of the one-point extension argument.

For a C-Lipschitz map with C < 1, a one-point extension either meets a source
at distance >= r (and then costs at most C + log(2)/r) or it does not (and
then the radial homothety bound arcsinh(C sinh r)/r applies). Minimizing the
larger of the two over r gives the uniform constant c_star < 1.
"""

import logging
import math
import typing as t

import numpy as np
from scipy.optimize import minimize_scalar

from .config import DELTA
from .errors import GeometryError
from .geometry import _asinh_exp, _exp_rows, _log_rows, _log_sinh, d_theta
from .models.point import HPoint
from .models.solution import BoundsReport

_log = logging.getLogger('hypext.bounds')

R_MAX = 1e3

# Above this radius sinh and arcsinh are evaluated in the log domain.
_LOG_DOMAIN = 30.0


def delta_gap(l1, l2):
    """l1 + l2 minus the length of the hypotenuse of the right triangle with legs l1, l2."""
    l1, l2 = np.asarray(l1, dtype=float), np.asarray(l2, dtype=float)
    out = l1 + l2 - np.asarray(d_theta(np.pi / 2, l1, l2))
    return float(out) if out.ndim == 0 else out


def c_hat(C: float, r: float) -> float:
    return C + DELTA / r


def arcsinh_bound(C: float, r: float) -> float:
    if C == 1.0:
        return 1.0
    if r > _LOG_DOMAIN:
        return float(_asinh_exp(math.log(C) + _log_sinh(r))) / r
    return math.asinh(C * math.sinh(r)) / r


def _objective(C: float, log_r: float) -> float:
    r = math.exp(log_r)
    return max(c_hat(C, r), arcsinh_bound(C, r))


def compute_c_star(C: float) -> BoundsReport:
    if not 0.0 < C < 1.0:
        raise ValueError(f'C must lie in (0, 1), got {C}')
    lower = DELTA / (1.0 - C) * (1.0 + 1e-6)
    upper = max(R_MAX, 2.0 * lower)
    res = minimize_scalar(lambda s: _objective(C, s), bounds=(math.log(lower), math.log(upper)),
                          method='bounded', options={'xatol': 1e-12})
    r_star = math.exp(res.x)
    report = BoundsReport(C=C, r_star=r_star, c_hat=c_hat(C, r_star),
                          arcsinh_value=arcsinh_bound(C, r_star),
                          c_star=max(c_hat(C, r_star), arcsinh_bound(C, r_star)))
    _log.debug('c_star(%.6g) = %.12g at r = %.9g', C, report.c_star, r_star)
    return report


def radial_homothety(o: HPoint, c: float, x: HPoint) -> HPoint:
    """exp_o(c log_o x): scales distances from o by c along every geodesic through o."""
    if o.dimension != x.dimension:
        raise GeometryError(f'Points live in H^{o.dimension} and H^{x.dimension}')
    if c == 1.0 or np.array_equal(o.coords, x.coords):
        return x
    return HPoint(_homothety_rows(o.coords, c, x.coords[None, :])[0], check=False)


def _homothety_rows(o: np.ndarray, c: float, xs: np.ndarray) -> np.ndarray:
    return _exp_rows(o, c * _log_rows(o, xs))


def homothety_lip_constants(c: float, r: float) -> t.Tuple[float, float]:
    """
    (forward, inverse) with forward = sinh(cr)/sinh(r), the tangential stretch of
    the homothety on the boundary of B_o(r), and inverse = sinh(r)/sinh(cr), the
    Lipschitz constant of its inverse on B_o(cr).
    """
    if c == 1.0:
        return 1.0, 1.0
    log_forward = float(_log_sinh(c * r) - _log_sinh(r))
    return math.exp(log_forward), math.exp(-log_forward)
