"""Scalar complex root finding: Newton with a finite-difference slope,
falling back to Muller's method when Newton stagnates."""

from __future__ import annotations

import cmath
import logging

from ..errors import NoConvergenceError

log = logging.getLogger(__name__)

__all__ = ["find_root_complex", "muller"]


def _derivative(f, z, fz=None):
    h = 1e-7 * max(1.0, abs(z))
    return (f(z + h) - f(z - h)) / (2.0 * h)


def _converged(fz, step, z, tol):
    return abs(fz) <= tol and abs(step) <= tol * max(1.0, abs(z))


def muller(f, z0, z1, z2, tol=1e-12, maxiter=200):
    """Muller iteration from three starting points.

    Returns ``(root, f(root), iterations)``; raises
    :class:`NoConvergenceError` at the cap.
    """
    f0, f1, f2 = f(z0), f(z1), f(z2)
    for it in range(1, maxiter + 1):
        h1, h2 = z1 - z0, z2 - z1
        if h1 == 0 or h2 == 0 or h1 + h2 == 0:
            break
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = cmath.sqrt(b * b - 4.0 * a * f2)
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        if den == 0:
            break
        step = -2.0 * f2 / den
        z0, z1, z2 = z1, z2, z2 + step
        f0, f1, f2 = f1, f2, f(z2)
        if f2 == 0 or _converged(f2, step, z2, tol):
            return z2, f2, it
    raise NoConvergenceError("Muller iteration did not converge", last=z2, residual=abs(f2))


def find_root_complex(f, seed, tol=1e-12, maxiter=200):
    """Root of an analytic scalar function near ``seed``.

    Newton steps use a central difference with step ``1e-7*max(1, |z|)``.
    Convergence requires both ``|f(z)| <= tol`` and a final correction no
    larger than ``tol*max(1, |z|)``.  If Newton fails to reduce ``|f|`` for
    several consecutive steps, the remaining budget goes to Muller's method
    started around the best iterate.

    Raises
    ------
    NoConvergenceError
        After ``maxiter`` function-evaluation rounds, carrying the last
        iterate and its residual.
    """
    z = complex(seed)
    fz = complex(f(z))
    best, fbest = z, fz
    stalls = 0
    for it in range(1, maxiter + 1):
        if fz == 0:
            return z
        dfz = _derivative(f, z)
        if dfz == 0 or not cmath.isfinite(dfz):
            break
        step = -fz / dfz
        znew = z + step
        fnew = complex(f(znew))
        if not cmath.isfinite(fnew):
            break
        if _converged(fnew, step, znew, tol):
            return znew
        if abs(fnew) < abs(fbest):
            best, fbest = znew, fnew
            stalls = 0
        else:
            stalls += 1
            if stalls >= 4:
                break
        z, fz = znew, fnew
    remaining = max(maxiter - it, 20)
    log.debug("Newton stagnated at %r (|f|=%.3e); switching to Muller", best, abs(fbest))
    h = 1e-3 * max(1.0, abs(best))
    try:
        root, froot, _ = muller(f, best - h, best + h, best, tol=tol, maxiter=remaining)
    except NoConvergenceError as exc:
        raise NoConvergenceError(
            f"no root found from seed {seed!r}", last=exc.last, residual=exc.residual
        ) from None
    return root
