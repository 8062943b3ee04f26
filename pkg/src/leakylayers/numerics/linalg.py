"""Small dense complex linear algebra."""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np
from scipy import linalg as sla

from ..errors import NoConvergenceError

__all__ = [
    "characteristic_polynomial",
    "durand_kerner",
    "eigenvalues_small",
    "SmallestSingular",
    "smallest_singular",
]

MAX_SMALL_DIMENSION = 16


def characteristic_polynomial(M):
    """Coefficients of det(zI - M), highest degree first (Faddeev-LeVerrier)."""
    A = np.asarray(M, dtype=complex)
    n = A.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    Mk = np.zeros_like(A)
    eye = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        Mk = A @ Mk + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(A @ Mk) / k
    return coeffs


def durand_kerner(coeffs, tol=1e-14, maxiter=2000):
    """All roots of a monic polynomial (coefficients highest degree first)."""
    c = np.asarray(coeffs, dtype=complex)
    c = c / c[0]
    n = len(c) - 1
    if n == 0:
        return np.array([], dtype=complex)
    radius = 1.0 + np.max(np.abs(c[1:]))
    roots = radius * (0.4 + 0.9j) ** np.arange(n)
    for _ in range(maxiter):
        diff = roots[:, None] - roots[None, :]
        np.fill_diagonal(diff, 1.0)
        step = np.polyval(c, roots) / np.prod(diff, axis=1)
        roots = roots - step
        if np.max(np.abs(step)) <= tol * max(1.0, np.max(np.abs(roots))):
            return roots
    residual = float(np.max(np.abs(np.polyval(c, roots))))
    raise NoConvergenceError("Durand-Kerner did not converge", last=roots, residual=residual)


def _lexsort(values):
    order = np.lexsort((values.imag, values.real))
    return values[order]


def eigenvalues_small(M):
    """Eigenvalues of a k x k complex matrix (k <= 16), with multiplicity.

    The matrix is shifted by its mean eigenvalue trace/k and rescaled before
    forming the characteristic polynomial, so clustered spectra (the usual
    case for near-degenerate levels) are resolved to absolute accuracy of
    order eps*|M| rather than sqrt(eps).  Output is sorted by (Re, Im).
    """
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError("expected a non-empty square matrix")
    k = A.shape[0]
    if k > MAX_SMALL_DIMENSION:
        raise ValueError(f"dimension {k} exceeds {MAX_SMALL_DIMENSION}")
    shift = np.trace(A) / k
    centred = A - shift * np.eye(k)
    scale = np.max(np.abs(centred))
    if scale == 0.0:
        return np.full(k, shift)
    roots = durand_kerner(characteristic_polynomial(centred / scale))
    return _lexsort(shift + scale * roots)


class SmallestSingular(NamedTuple):
    value: float
    vector: np.ndarray
    singular: bool


def smallest_singular(M, tol=1e-14, maxiter=200):
    """Smallest singular value of a square matrix and its right vector.

    Inverse iteration on M^H M, each step solved with the LU factors of M.
    An exactly zero pivot short-circuits to ``value=0`` with
    ``singular=True``.
    """
    A = np.asarray(M, dtype=complex)
    n = A.shape[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if np.any(pivots == 0.0):
        # any vector in the kernel of U is a null vector of A
        vec = _null_vector_from_lu(lu)
        return SmallestSingular(0.0, vec, True)
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    sigma = np.inf
    for _ in range(maxiter):
        y = sla.lu_solve((lu, piv), x, trans=2)
        y = sla.lu_solve((lu, piv), y)
        x = y / np.linalg.norm(y)
        new = float(np.linalg.norm(A @ x))
        if abs(new - sigma) <= tol * max(new, np.finfo(float).tiny):
            sigma = new
            break
        sigma = new
    return SmallestSingular(sigma, x, False)


def _null_vector_from_lu(lu):
    n = lu.shape[0]
    U = np.triu(lu)
    j = int(np.flatnonzero(np.diag(U) == 0)[0])
    vec = np.zeros(n, dtype=complex)
    vec[j] = 1.0
    if j > 0:
        vec[:j] = sla.solve_triangular(U[:j, :j], -U[:j, j])
    return vec / np.linalg.norm(vec)
