"""
Modified Bessel functions of the first kind, orders 0 and 1, and their ratio.

The estimator only needs I1(x)/I0(x). The ratio is evaluated with the power
series for small arguments, exponentially scaled functions in the middle range
and the asymptotic expansion for very large arguments, so it never overflows.
"""

from typing import Union

import numpy as np
from scipy import special

from ..errors import BesselDomainError, BesselOverflowError

ArrayLike = Union[float, np.ndarray]

# exp(709.78) is the largest finite double; keep a margin for the prefactor
OVERFLOW_THRESHOLD = 700.0
SERIES_LIMIT = 15.0
ASYMPTOTIC_THRESHOLD = 1.0e4
_SERIES_TERMS = 48

# I1/I0 ~ 1 - 1/(2x) - 1/(8x^2) - 1/(8x^3) - 25/(128x^4)
_ASYMPTOTIC_COEFFS = (1.0, -0.5, -0.125, -0.125, -25.0 / 128.0)


def _as_argument(x: ArrayLike) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(values)):
        raise BesselDomainError(f"Bessel argument must be finite, got {x!r}")
    if np.any(values < 0.0):
        raise BesselDomainError(f"Bessel argument must be nonnegative, got {x!r}")
    return values


def _check_overflow(values: np.ndarray) -> None:
    if np.any(values > OVERFLOW_THRESHOLD):
        raise BesselOverflowError(
            f"Argument above {OVERFLOW_THRESHOLD} overflows; use bessel_ratio_i1_i0 instead"
        )


def _result(values: np.ndarray, like: ArrayLike) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(values)
    return values


def _series(x: np.ndarray):
    """Power series for (I0, I1), summed term by term with positive terms only."""
    half = 0.5 * x
    q = half * half
    term0 = np.ones_like(x)
    term1 = half.copy()
    i0 = term0.copy()
    i1 = term1.copy()
    for k in range(1, _SERIES_TERMS):
        term0 = term0 * q / (k * k)
        term1 = term1 * q / (k * (k + 1))
        i0 += term0
        i1 += term1
    return i0, i1


def _asymptotic_ratio(x: np.ndarray) -> np.ndarray:
    t = 1.0 / x
    return np.polynomial.polynomial.polyval(t, _ASYMPTOTIC_COEFFS)


def bessel_i0(x: ArrayLike) -> ArrayLike:
    """I0(x) for 0 <= x <= OVERFLOW_THRESHOLD."""
    values = _as_argument(x)
    _check_overflow(values)
    small = values < SERIES_LIMIT
    out = np.empty_like(values)
    out[small] = _series(values[small])[0]
    large = values[~small]
    out[~small] = special.i0e(large) * np.exp(large)
    return _result(out, x)


def bessel_i1(x: ArrayLike) -> ArrayLike:
    """I1(x) for 0 <= x <= OVERFLOW_THRESHOLD."""
    values = _as_argument(x)
    _check_overflow(values)
    small = values < SERIES_LIMIT
    out = np.empty_like(values)
    out[small] = _series(values[small])[1]
    large = values[~small]
    out[~small] = special.i1e(large) * np.exp(large)
    return _result(out, x)


def bessel_ratio_i1_i0(x: ArrayLike) -> ArrayLike:
    """
    I1(x)/I0(x) for any finite x >= 0.

    Accepts a scalar or an array and returns the same shape. The value lies in
    [0, 1) and increases strictly with x.
    """
    values = _as_argument(x)
    out = np.empty_like(values)

    small = values < SERIES_LIMIT
    huge = values >= ASYMPTOTIC_THRESHOLD
    middle = ~small & ~huge

    i0, i1 = _series(values[small])
    out[small] = i1 / i0
    out[middle] = special.i1e(values[middle]) / special.i0e(values[middle])
    out[huge] = _asymptotic_ratio(values[huge])
    return _result(out, x)


class BesselRatioTable:
    """Look-up table for I1/I0 with linear interpolation on a uniform grid."""

    def __init__(self, x_max: float = 50.0, size: int = 8193):
        if not np.isfinite(x_max) or x_max <= 0.0:
            raise BesselDomainError(f"Table range must be positive, got {x_max}")
        if size < 2:
            raise BesselDomainError(f"Table needs at least 2 points, got {size}")
        self.x_max = float(x_max)
        self.size = int(size)
        self.grid = np.linspace(0.0, self.x_max, self.size)
        self.values = bessel_ratio_i1_i0(self.grid)

    def __call__(self, x: ArrayLike) -> ArrayLike:
        values = _as_argument(x)
        out = np.array(np.interp(values, self.grid, self.values), dtype=float)
        beyond = values > self.x_max
        out[beyond] = _asymptotic_ratio(values[beyond])
        return _result(out, x)

    def __repr__(self):
        return f"<BesselRatioTable x_max={self.x_max} size={self.size}>"
