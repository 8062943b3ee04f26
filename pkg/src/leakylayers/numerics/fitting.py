"""Least-squares polynomial models in the separation parameter."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FitResult", "extrapolate", "fit_expansion", "loglog_slope"]


@dataclass(frozen=True)
class FitResult:
    coefficients: np.ndarray  # c_0, c_1, ... of sum c_k eps^k
    residual_norm: float
    order_estimate: float

    def __call__(self, eps):
        return np.polyval(self.coefficients[::-1], eps)


def loglog_slope(x, y):
    """Least-squares slope of log|y| against log x."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y))
    if np.any(y == 0):
        return float("inf")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _lstsq(eps, values, degree):
    scale = float(np.max(eps))
    V = np.vander(eps / scale, degree + 1, increasing=True)
    sol, *_ = np.linalg.lstsq(V, values.astype(complex), rcond=None)
    coeffs = sol / scale ** np.arange(degree + 1)
    resid = float(np.linalg.norm(V @ sol - values))
    return coeffs, resid


def fit_expansion(points, degree):
    """Fit ``value ~ sum_k c_k eps^k`` for k <= degree by least squares.

    ``order_estimate`` is the power p in ``value - c_0 - c_1 eps ~ eps^p``:
    the constant and linear terms come from a fit one degree higher (so the
    leading remainder is absorbed rather than aliased into them), and p is
    the log-log slope of what is left.  An exactly affine data set returns
    ``inf``.

    Parameters
    ----------
    points : iterable of (eps, value)
        ``eps > 0``; at least ``degree + 2`` distinct values.
    """
    pts = list(points)
    eps = np.array([float(e) for e, _ in pts])
    values = np.array([complex(v) for _, v in pts])
    if degree < 1:
        raise ValueError("degree must be >= 1")
    if np.any(eps <= 0):
        raise ValueError("eps values must be positive")
    if len(np.unique(eps)) != len(eps):
        raise ValueError("repeated eps values")
    if len(eps) < degree + 2:
        raise ValueError(f"need at least {degree + 2} points for degree {degree}")
    coeffs, resid = _lstsq(eps, values, degree)
    ref, _ = _lstsq(eps, values, degree + 1)
    remainder = values - ref[0] - ref[1] * eps
    floor = 1e-14 * max(1.0, float(np.max(np.abs(values))))
    if np.max(np.abs(remainder)) <= floor:
        order = float("inf")
    else:
        order = loglog_slope(eps, remainder)
    return FitResult(coefficients=coeffs, residual_norm=resid, order_estimate=order)


def extrapolate(points):
    """Polynomial through all points (Richardson extrapolation to eps = 0).

    With n points the model has degree n - 1, so ``residual_norm`` is the
    interpolation residual (rounding only).  ``order_estimate`` is the
    log-log slope of ``value - c_0 - c_1 eps``.
    """
    pts = list(points)
    eps = np.array([float(e) for e, _ in pts])
    values = np.array([complex(v) for _, v in pts])
    if len(eps) < 3:
        raise ValueError("need at least 3 points")
    if np.any(eps <= 0):
        raise ValueError("eps values must be positive")
    if len(np.unique(eps)) != len(eps):
        raise ValueError("repeated eps values")
    coeffs, resid = _lstsq(eps, values, len(eps) - 1)
    remainder = values - coeffs[0] - coeffs[1] * eps
    floor = 1e-14 * max(1.0, float(np.max(np.abs(values))))
    order = float("inf") if np.max(np.abs(remainder)) <= floor else loglog_slope(eps, remainder)
    return FitResult(coefficients=coeffs, residual_norm=resid, order_estimate=order)
