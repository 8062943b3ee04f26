"""Modified Bessel functions I_nu and K_nu for integer and half-integer order.

Integer orders are delegated to the AMOS routines wrapped by
:mod:`scipy.special`.  Half-integer orders use the terminating elementary
expressions (with the ascending series for I near the origin, where the
elementary form cancels).

All functions accept scalars or arrays.  Real input with positive entries
stays real; anything else is evaluated in complex arithmetic.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sc

from ..errors import DomainError, RangeError

__all__ = [
    "bessel_i",
    "bessel_k",
    "bessel_i_prime",
    "bessel_k_prime",
    "MAX_ABS_ARGUMENT",
    "MIN_ABS_ARGUMENT_K",
]

#: beyond this |z| the exponential factor of I overflows double precision
MAX_ABS_ARGUMENT = 700.0
#: below this |z| K_nu is reported as a range error
MIN_ABS_ARGUMENT_K = 1e-10

_SERIES_RADIUS = 4.0
_SERIES_TERMS = 34


def _check_order(nu):
    twice = 2.0 * float(nu)
    if nu < 0 or twice != round(twice):
        raise DomainError(f"order must be a non-negative integer or half-integer, got {nu}")
    return int(round(twice)) % 2 == 1


def _check_argument(z):
    arr = np.asarray(z)
    if not np.all(np.isfinite(arr)):
        raise DomainError("non-finite Bessel argument")
    if np.any(np.real(arr) <= 0):
        raise DomainError("Bessel argument must satisfy Re z > 0")
    if np.any(np.abs(arr) > MAX_ABS_ARGUMENT):
        raise RangeError(f"|z| exceeds the declared bound {MAX_ABS_ARGUMENT}")
    if not np.isrealobj(arr):
        arr = arr.astype(complex)
    elif arr.dtype.kind != "f":
        arr = arr.astype(float)
    return arr


def _half_coefficients(n):
    # a_k(n) = (n+k)! / (k! (n-k)! 2^k)
    return [math.factorial(n + k) / (math.factorial(k) * math.factorial(n - k) * 2.0**k)
            for k in range(n + 1)]


def _poly_inverse(coeffs, z, alternate):
    total = np.zeros_like(z)
    inv = 1.0 / z
    power = np.ones_like(z)
    for k, a in enumerate(coeffs):
        sign = -1.0 if (alternate and k % 2) else 1.0
        total = total + sign * a * power
        power = power * inv
    return total


def _i_series(nu, z):
    quarter = 0.25 * z * z
    term = np.ones_like(z) / math.gamma(nu + 1.0)
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * quarter / (k * (k + nu))
        total = total + term
    return total * (0.5 * z) ** nu


def _i_half(n, z):
    a = _half_coefficients(n)
    out = np.empty_like(z)
    small = np.abs(z) <= _SERIES_RADIUS
    if np.any(small):
        out[small] = _i_series(n + 0.5, z[small])
    big = ~small
    if np.any(big):
        w = z[big]
        grow = np.exp(w) * _poly_inverse(a, w, alternate=True)
        decay = np.exp(-w) * _poly_inverse(a, w, alternate=False)
        out[big] = (grow + (-1.0) ** (n + 1) * decay) / np.sqrt(2.0 * np.pi * w)
    return out


def _k_half(n, z):
    a = _half_coefficients(n)
    return np.sqrt(np.pi / (2.0 * z)) * np.exp(-z) * _poly_inverse(a, z, alternate=False)


def _scalarize(value, z):
    if np.ndim(z) == 0:
        return value[()]
    return value


def bessel_i(nu, z):
    """Modified Bessel function of the first kind I_nu(z), Re z > 0."""
    half = _check_order(nu)
    arr = _check_argument(z)
    work = np.atleast_1d(arr)
    if half:
        val = _i_half(int(nu - 0.5), work)
    else:
        val = sc.iv(int(nu), work)
    return _scalarize(val.reshape(arr.shape), z)


def bessel_k(nu, z):
    """Modified Bessel function of the second kind K_nu(z), Re z > 0.

    Raises
    ------
    RangeError
        If ``|z|`` is below :data:`MIN_ABS_ARGUMENT_K`, where K blows up.
    """
    half = _check_order(nu)
    arr = _check_argument(z)
    if np.any(np.abs(arr) < MIN_ABS_ARGUMENT_K):
        raise RangeError("K_nu(z) diverges as z -> 0; |z| below cutoff")
    work = np.atleast_1d(arr)
    if half:
        val = _k_half(int(nu - 0.5), work)
    else:
        val = sc.kv(int(nu), work)
    return _scalarize(val.reshape(arr.shape), z)


def bessel_i_prime(nu, z):
    """dI_nu/dz via I_nu' = I_{nu+1} + (nu/z) I_nu."""
    return bessel_i(nu + 1, z) + (nu / np.asarray(z)) * bessel_i(nu, z)


def bessel_k_prime(nu, z):
    """dK_nu/dz via K_nu' = -K_{nu+1} + (nu/z) K_nu."""
    return -bessel_k(nu + 1, z) + (nu / np.asarray(z)) * bessel_k(nu, z)
