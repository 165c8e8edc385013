"""Principal branch of the Lambert W function for real arguments.

Halley iteration on f(w) = w e^w - z, started from a guess chosen per region:
a series about the branch point for z < 0, z / (1 + z) on [0, e] and the
asymptotic ln z - ln ln z above e.
"""

from __future__ import annotations

import math

from .errors import ConvergenceError, DomainError

BRANCH_POINT = -1.0 / math.e
MAX_ITERATIONS = 50

_BRANCH_SLACK = 1e-15
_EPS = 2.220446049250313e-16
# below this distance parameter the branch-point series is exact to double precision
_SERIES_ONLY = 1e-3
_SERIES = (-1.0, 1.0, -1.0 / 3.0, 11.0 / 72.0, -43.0 / 540.0, 769.0 / 17280.0,
           -221.0 / 8505.0)


def _branch_series(p: float) -> float:
    w = 0.0
    for coeff in reversed(_SERIES):
        w = w * p + coeff
    return w


def _initial_guess(z: float) -> float:
    if z < 0:
        return _branch_series(math.sqrt(max(0.0, 2.0 * (1.0 + math.e * z))))
    if z <= math.e:
        return z / (1.0 + z)
    lz = math.log(z)
    return lz - math.log(lz)


def lambert_w0_iterations(z: float) -> tuple[float, int]:
    """Return ``(W0(z), number of Halley updates used)``."""
    if math.isnan(z):
        raise DomainError("lambert_w0 of NaN")
    if z < BRANCH_POINT - _BRANCH_SLACK:
        raise DomainError(f"lambert_w0 requires z >= -1/e, got {z!r}")
    if z == 0.0:
        return 0.0, 0
    if math.isinf(z):
        return math.inf, 0
    if z < 0:
        p = math.sqrt(max(0.0, 2.0 * (1.0 + math.e * z)))
        if p < _SERIES_ONLY:
            return _branch_series(p), 0

    w = _initial_guess(z)
    for i in range(MAX_ITERATIONS + 1):
        ew = math.exp(w)
        f = w * ew - z
        # residual already at rounding level; near the branch point dw stalls above it
        if abs(f) <= 4.0 * _EPS * abs(z):
            return w, i
        if i == MAX_ITERATIONS:
            break
        wp1 = w + 1.0
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4.0 * _EPS * (1.0 + abs(w)):
            return w, i + 1
    raise ConvergenceError(f"lambert_w0 did not converge for z={z!r}")


def lambert_w0(z: float) -> float:
    """W0(z): the solution w >= -1 of w e^w = z, for real z >= -1/e."""
    return lambert_w0_iterations(z)[0]
