"""Two point interactions at x = +eps (coupling a+) and x = -eps (coupling a-).

Everything here is closed form up to the root of the secular equation::

    (a+ + 2k)(a- + 2k) - a+ a- exp(-4 k eps) = 0,    lambda = -k^2.

Eigenfunctions are sums of exponentials on each interval, so their bilinear
integrals are evaluated exactly rather than by quadrature.

The unnormalized eigenfunction is, with k = kappa_eps,

    x < -eps       exp(k (x + eps))
    |x| < eps      c1 exp(-k (x + eps)) + c2 exp(k (x + eps))
    x > eps        c3 exp(-k (x - eps))

with c1 = -a-/(2k), c2 = (a- + 2k)/(2k) and
c3 = c1 exp(-2 k eps) + c2 exp(2 k eps).  The shifted exponentials are what
make these constants satisfy continuity and the jump at x = -eps; matching at
x = +eps is then exactly the secular equation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import TraceBundle
from .coupling import Coupling
from .errors import (
    ConsistencyError,
    DomainError,
    NoBoundStateError,
    NoConvergenceError,
    NormalizationError,
)
from .geometry import PointSurface
from .numerics import find_root_complex

__all__ = [
    "Coupling",
    "ExpPiecewise",
    "PiecewiseEigenfunction",
    "CorrectionDecomposition",
    "limit_eigenvalue",
    "secular_residual",
    "solve_kappa",
    "eigenvalue",
    "eigenfunction",
    "first_order_coefficient",
    "trace_form_coefficient",
    "correction_decomposition",
    "uniform_difference",
    "trace_bundle",
    "max_epsilon",
]

BASIN_FACTOR = 0.1
KAPPA_TOL = 1e-14


# ---------------------------------------------------------------------------
# piecewise sums of exponentials
# ---------------------------------------------------------------------------


def _integrate_exp(coef, rate, a, b):
    """coef * Int_a^b exp(rate x) dx for a < b, possibly infinite."""
    if a == -math.inf:
        if rate.real <= 0:
            raise DomainError("divergent integral on (-inf, b)")
        return coef * cmath.exp(rate * b) / rate
    if b == math.inf:
        if rate.real >= 0:
            raise DomainError("divergent integral on (a, inf)")
        return -coef * cmath.exp(rate * a) / rate
    if rate == 0:
        return coef * (b - a)
    width = b - a
    return coef * cmath.exp(rate * a) * complex(np.expm1(rate * width)) / rate


class ExpPiecewise:
    """Function equal to ``sum coef*exp(rate*x)`` on each interval.

    ``breaks`` are the finite interior breakpoints; ``pieces[i]`` holds the
    ``(coef, rate)`` terms on the i-th of the ``len(breaks) + 1`` intervals.
    """

    def __init__(self, breaks, pieces):
        self.breaks = [float(b) for b in breaks]
        self.pieces = [[(complex(c), complex(r)) for c, r in terms] for terms in pieces]
        if len(self.pieces) != len(self.breaks) + 1:
            raise ValueError("need one term list per interval")

    def intervals(self):
        edges = [-math.inf, *self.breaks, math.inf]
        return list(zip(edges[:-1], edges[1:]))

    def refine(self, breaks):
        new = sorted(set(self.breaks) | {float(b) for b in breaks})
        pieces = []
        for a, b in zip([-math.inf, *new], [*new, math.inf]):
            mid = _midpoint(a, b)
            pieces.append(self.pieces[self._index(mid)])
        return ExpPiecewise(new, pieces)

    def _index(self, x):
        return int(np.searchsorted(self.breaks, x, side="right"))

    def _eval_terms(self, terms, x):
        return sum(c * np.exp(r * x) for c, r in terms)

    def __call__(self, x, side=1):
        """Value at x; at a breakpoint ``side`` picks the right (+1) or left (-1) piece."""
        x = float(x)
        idx = self._index(x)
        if side < 0 and x in self.breaks:
            idx -= 1
        return complex(self._eval_terms(self.pieces[idx], x))

    def derivative(self):
        return ExpPiecewise(self.breaks, [[(c * r, r) for c, r in t] for t in self.pieces])

    def scale(self, factor):
        return ExpPiecewise(self.breaks, [[(factor * c, r) for c, r in t] for t in self.pieces])

    def __sub__(self, other):
        breaks = sorted(set(self.breaks) | set(other.breaks))
        left, right = self.refine(breaks), other.refine(breaks)
        pieces = [a + [(-c, r) for c, r in b] for a, b in zip(left.pieces, right.pieces)]
        return ExpPiecewise(breaks, pieces)

    def integrate_product(self, other):
        """Bilinear Int_R self * other (no conjugation)."""
        breaks = sorted(set(self.breaks) | set(other.breaks))
        left, right = self.refine(breaks), other.refine(breaks)
        total = 0j
        for (a, b), p, q in zip(left.intervals(), left.pieces, right.pieces):
            for c1, r1 in p:
                for c2, r2 in q:
                    total += _integrate_exp(c1 * c2, r1 + r2, a, b)
        return total

    def integrate_modulus_sq(self):
        """Int_R |self|^2."""
        conj = ExpPiecewise(self.breaks, [[(c.conjugate(), r.conjugate()) for c, r in t]
                                          for t in self.pieces])
        return self.integrate_product(conj).real


def _midpoint(a, b):
    if a == -math.inf and b == math.inf:
        return 0.0
    if a == -math.inf:
        return b - 1.0
    if b == math.inf:
        return a + 1.0
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# spectral problem
# ---------------------------------------------------------------------------


def _limit_kappa(c):
    if not c.total.real < 0:
        raise NoBoundStateError("bound state requires Re(a+ + a-) < 0")
    return -c.total / 2.0


def limit_eigenvalue(c):
    """lambda_0 = -(a+ + a-)^2 / 4 of the single interaction a+ + a- at 0."""
    _limit_kappa(c)
    return -(c.total**2) / 4.0


def secular_residual(kappa, epsilon, c):
    ap, am = c.alpha_plus, c.alpha_minus
    kappa = complex(kappa)
    return (ap + 2 * kappa) * (am + 2 * kappa) - ap * am * cmath.exp(-4 * kappa * epsilon)


def max_epsilon(c):
    """Upper end of the separation range where the seeded Newton basin is trusted."""
    k0 = _limit_kappa(c)
    prod = abs(c.alpha_plus * c.alpha_minus)
    return math.inf if prod == 0 else BASIN_FACTOR * abs(k0) / prod


def solve_kappa(epsilon, c):
    """Decay rate kappa_eps (Re > 0) of the bound state for separation 2*eps."""
    if not epsilon > 0:
        raise DomainError("solve_kappa needs eps > 0")
    k0 = _limit_kappa(c)
    if epsilon >= max_epsilon(c):
        raise DomainError(f"eps={epsilon} outside the verified basin eps < {max_epsilon(c):.4g}")
    seed = k0 - c.alpha_plus * c.alpha_minus * epsilon

    def f(k):
        return secular_residual(k, epsilon, c)

    for start in (seed, 1.5 * seed):
        try:
            root = find_root_complex(f, start, tol=KAPPA_TOL * max(1.0, abs(k0)) ** 2)
        except NoConvergenceError:
            continue
        if abs(root) > 1e-8 * abs(k0):
            break
    else:
        raise NoBoundStateError(f"no nonzero root of the secular equation near {seed}")
    if not root.real > 0:
        raise NoBoundStateError(f"root {root} has Re kappa <= 0 (not a bound state)")
    return root


def eigenvalue(epsilon, c):
    if epsilon == 0:
        return limit_eigenvalue(c)
    return -solve_kappa(epsilon, c) ** 2


@dataclass(frozen=True)
class PiecewiseEigenfunction:
    kappa: complex
    epsilon: float
    c1: complex
    c2: complex
    c3: complex
    normalization: complex  # Int f^2 of the unnormalized function

    @property
    def scale(self):
        # principal branch: Re > 0, continuous in eps
        return 1.0 / cmath.sqrt(self.normalization)

    def raw(self):
        k, e = self.kappa, self.epsilon
        if e == 0:
            return ExpPiecewise([0.0], [[(1.0, k)], [(self.c3, -k)]])
        return ExpPiecewise(
            [-e, e],
            [
                [(cmath.exp(k * e), k)],
                [(self.c1 * cmath.exp(-k * e), -k), (self.c2 * cmath.exp(k * e), k)],
                [(self.c3 * cmath.exp(k * e), -k)],
            ],
        )

    def pieces(self):
        """Normalized eigenfunction (Int psi^2 = 1) as an :class:`ExpPiecewise`."""
        return self.raw().scale(self.scale)

    def __call__(self, x, side=1):
        return self.pieces()(x, side)

    def derivative(self, x, side=1):
        return self.pieces().derivative()(x, side)


def _constants(kappa, epsilon, c):
    am = c.alpha_minus
    c1 = -am / (2 * kappa)
    c2 = (am + 2 * kappa) / (2 * kappa)
    c3 = c1 * cmath.exp(-2 * kappa * epsilon) + c2 * cmath.exp(2 * kappa * epsilon)
    return c1, c2, c3


def eigenfunction(epsilon, c):
    """Bilinearly normalized eigenfunction of the eps-problem (eps = 0 allowed)."""
    kappa = _limit_kappa(c) if epsilon == 0 else solve_kappa(epsilon, c)
    c1, c2, c3 = _constants(kappa, epsilon, c)
    if epsilon == 0:
        c3 = 1.0 + 0j
    probe = PiecewiseEigenfunction(kappa, float(epsilon), c1, c2, c3, 1.0)
    raw = probe.raw()
    norm = raw.integrate_product(raw)
    if abs(norm) <= 1e-14 * raw.integrate_modulus_sq():
        raise NormalizationError("eigenfunction is self-orthogonal")
    return PiecewiseEigenfunction(kappa, float(epsilon), c1, c2, c3, norm)


def first_order_coefficient(c):
    """lambda_0' = -(a+ + a-) a+ a-, cross-checked against the trace form."""
    closed = -c.total * c.alpha_plus * c.alpha_minus
    traced = trace_form_coefficient(c)
    if abs(closed - traced) > 1e-10 * max(1.0, abs(closed)):
        raise ConsistencyError(f"slope forms disagree: {closed} vs {traced}")
    return closed


def trace_form_coefficient(c):
    """a+ (psi0^2)'(0+) - a- (psi0^2)'(0-) - (a+^2 + a-^2) psi0(0)^2."""
    psi = eigenfunction(0.0, c)
    v = psi(0.0)
    d_right = 2 * v * psi.derivative(0.0, side=1)
    d_left = 2 * v * psi.derivative(0.0, side=-1)
    ap, am = c.alpha_plus, c.alpha_minus
    return ap * d_right - am * d_left - (ap**2 + am**2) * v * v


def trace_bundle(c):
    """Limit-problem traces at the point {0} for the generic slope formula."""
    psi = eigenfunction(0.0, c)
    return TraceBundle(
        surface=PointSurface(),
        psi0=[psi(0.0)],
        dn_plus=[psi.derivative(0.0, side=1)],
        dn_minus=[psi.derivative(0.0, side=-1)],
        K1=[0.0],
        dimension=1,
        norm_sq=1.0,
    )


@dataclass(frozen=True)
class CorrectionDecomposition:
    form_difference: complex  # (h_eps - h_0)(psi0, psi0)
    omega_energy: complex  # h_eps(omega, omega), omega = psi0 - (psi_eps, psi0) psi_eps
    projector_norm: float  # ||omega||_{L^2}
    overlap: complex  # (psi_eps, psi0), bilinear
    omega_sq: complex  # Int omega^2, bilinear
    limit_eigenvalue: complex
    eigenvalue: complex

    @property
    def reconstructed_eigenvalue(self):
        """(lambda_0 + form_difference - omega_energy) / (1 - Int omega^2)."""
        return (self.limit_eigenvalue + self.form_difference - self.omega_energy) / (
            1.0 - self.omega_sq
        )


def correction_decomposition(epsilon, c):
    """Split lambda_eps into form difference and projector remainder."""
    if not epsilon > 0:
        raise DomainError("decomposition needs eps > 0")
    psi0 = eigenfunction(0.0, c).pieces()
    psie_fn = eigenfunction(epsilon, c)
    psie = psie_fn.pieces()
    ap, am = c.alpha_plus, c.alpha_minus
    e = float(epsilon)
    form_diff = ap * psi0(e) ** 2 + am * psi0(-e) ** 2 - c.total * psi0(0.0) ** 2
    s = psie.integrate_product(psi0)
    omega = psi0 - psie.scale(s)
    domega = omega.refine([-e, 0.0, e]).derivative()
    energy = domega.integrate_product(domega) + ap * omega(e) ** 2 + am * omega(-e) ** 2
    return CorrectionDecomposition(
        form_difference=form_diff,
        omega_energy=energy,
        projector_norm=math.sqrt(max(omega.integrate_modulus_sq(), 0.0)),
        overlap=s,
        omega_sq=omega.integrate_product(omega),
        limit_eigenvalue=limit_eigenvalue(c),
        eigenvalue=-psie_fn.kappa**2,
    )


def uniform_difference(epsilon, c):
    """max over x = +-eps of |psi_eps(x) - psi_0(x)| (normalized eigenfunctions)."""
    if epsilon == 0:
        return 0.0
    psi0 = eigenfunction(0.0, c).pieces()
    psie = eigenfunction(epsilon, c).pieces()
    return max(abs(psie(x) - psi0(x)) for x in (epsilon, -epsilon))
