"""Two concentric delta shells at radii R - eps (coupling a-) and R + eps
(coupling a+) in d = 2 or 3, one angular sector at a time.

In the sector with angular index m the radial factor is
``u(r) = r^(-s) Z(kappa r)`` with ``s = (d - 2)/2`` and Z a modified Bessel
function of order ``nu = m + s``.  Continuity of u and the jump
``u'(rho+) - u'(rho-) = alpha u(rho)`` carry over verbatim to Z, so both
dimensions share one matching matrix.  The unknowns multiply basis
functions normalized at the shell they touch::

    r < R - eps            A I(kr) / I(k rho-)
    R - eps < r < R + eps  B I(kr) / I(k rho+) + C K(kr) / K(k rho-)
    r > R + eps            D K(kr) / K(k rho+)

which keeps every matrix entry O(1) without row equilibration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate, special

from .asymptotics import TraceBundle, slope_matrix, slope_simple
from .coupling import Coupling
from .errors import DomainError, NoBoundStateError, NoConvergenceError, NormalizationError
from .geometry import Circle, Sphere
from .numerics import (
    bessel_i,
    bessel_i_prime,
    bessel_k,
    bessel_k_prime,
    find_root_complex,
    smallest_singular,
)

__all__ = [
    "RadialProblem",
    "RadialEigenData",
    "secular_det",
    "matching_matrix",
    "solve_eigenvalue",
    "default_seed",
    "predicted_slope",
    "degenerate_pair",
    "trace_bundle",
    "degenerate_slopes",
]

CERTIFY_RATIO = 1e-8
TAIL_LENGTH = 40.0


@dataclass(frozen=True)
class RadialProblem:
    dimension: int
    R: float
    epsilon: float
    coupling: Coupling
    m: int = 0

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise DomainError("radial solver supports d = 2 and d = 3")
        if not self.R > 0:
            raise DomainError("R must be positive")
        if not 0 <= self.epsilon < 0.9 * self.R:
            raise DomainError("need 0 <= eps < 0.9 R")
        if int(self.m) != self.m or self.m < 0:
            raise DomainError("angular index must be a non-negative integer")
        if not isinstance(self.coupling, Coupling):
            object.__setattr__(self, "coupling", Coupling(*self.coupling))

    @property
    def shift(self):
        return (self.dimension - 2) / 2.0

    @property
    def order(self):
        return self.m + self.shift

    @property
    def radii(self):
        return self.R - self.epsilon, self.R + self.epsilon

    def at(self, epsilon):
        return replace(self, epsilon=float(epsilon))

    def limit(self):
        return self.at(0.0)


def _ratios(nu, z):
    """I'/I and K'/K at z."""
    return bessel_i_prime(nu, z) / bessel_i(nu, z), bessel_k_prime(nu, z) / bessel_k(nu, z)


def matching_matrix(kappa, p):
    """Interface matrix in the normalized piecewise basis (2x2 when eps = 0)."""
    kappa = complex(kappa)
    if not kappa.real > 0:
        raise DomainError("matching matrix needs Re kappa > 0")
    nu = p.order
    ap, am = p.coupling.alpha_plus, p.coupling.alpha_minus
    if p.epsilon == 0:
        li, lk = _ratios(nu, kappa * p.R)
        return np.array([[1.0, -1.0], [-li - (ap + am) / kappa, lk]], dtype=complex)
    rm, rp = p.radii
    zm, zp = kappa * rm, kappa * rp
    Im, Ip = bessel_i(nu, zm), bessel_i(nu, zp)
    Km, Kp = bessel_k(nu, zm), bessel_k(nu, zp)
    dIm, dIp = bessel_i_prime(nu, zm), bessel_i_prime(nu, zp)
    dKm, dKp = bessel_k_prime(nu, zm), bessel_k_prime(nu, zp)
    return np.array(
        [
            [1.0, -Im / Ip, -1.0, 0.0],
            [-dIm / Im - am / kappa, dIm / Ip, dKm / Km, 0.0],
            [0.0, 1.0, Kp / Km, -1.0],
            [0.0, -dIp / Ip, -dKp / Km, dKp / Kp - ap / kappa],
        ],
        dtype=complex,
    )


def secular_det(kappa, p):
    """Determinant of the matching matrix; zero exactly at eigenvalues -kappa^2."""
    return complex(np.linalg.det(matching_matrix(kappa, p)))


def default_seed(p):
    """kappa of a flat shell with the total coupling; a fair start for small m."""
    total = p.coupling.total
    if not total.real < 0:
        raise NoBoundStateError("no bound state expected for Re(a+ + a-) >= 0")
    return -total / 2.0


@dataclass(frozen=True)
class RadialEigenData:
    """Eigenvalue and eigenfunction of one sector, scaled so ``u(R) = 1``.

    ``trace_dn_plus`` / ``trace_dn_minus`` are the one-sided limits of
    ``u'(r)`` at R from outside / inside; they coincide for eps > 0.  The
    angular factor is ``cos`` or ``sin`` of ``m theta`` for d = 2, and
    ``P_l^1(cos theta)`` times ``cos phi`` or ``sin phi`` for d = 3 (just 1
    when the index is 0).  ``norm_sq`` is the bilinear ``Int psi^2`` over R^d
    of radial times angular factor.
    """

    problem: RadialProblem
    kappa: complex
    coefficients: tuple
    trace_psi0: complex
    trace_dn_plus: complex
    trace_dn_minus: complex
    norm_sq: complex
    angular: str = "cos"
    certificate: float = 0.0

    @property
    def lam(self):
        return -self.kappa**2

    # radial profile ---------------------------------------------------
    def _piece(self, r, side):
        """0 inside, 1 annulus, 2 outside; at a shell ``side`` breaks the tie."""
        rm, rp = self.problem.radii
        if r < rm or (r == rm and side < 0):
            return 0
        if r < rp or (r == rp and side < 0):
            return 1
        return 2

    def _z(self, r, piece, derivative):
        p, k = self.problem, self.kappa
        nu = p.order
        rm, rp = p.radii
        A, B, C, D = self.coefficients
        Fi = bessel_i_prime if derivative else bessel_i
        Fk = bessel_k_prime if derivative else bessel_k
        scale = k if derivative else 1.0
        z = k * r
        if piece == 0:
            return scale * A * Fi(nu, z) / bessel_i(nu, k * rm)
        if piece == 2:
            return scale * D * Fk(nu, z) / bessel_k(nu, k * rp)
        return scale * (B * Fi(nu, z) / bessel_i(nu, k * rp) + C * Fk(nu, z) / bessel_k(nu, k * rm))

    def u(self, r, side=1):
        """Radial factor at r; ``side`` picks the outer (+1) or inner (-1) piece at a shell."""
        s = self.problem.shift
        return complex(r ** (-s) * self._z(r, self._piece(r, side), False))

    def du(self, r, side=1):
        s = self.problem.shift
        piece = self._piece(r, side)
        Z, dZ = self._z(r, piece, False), self._z(r, piece, True)
        return complex(r ** (-s) * (dZ - s * Z / r))

    def interface_residual(self):
        """Largest continuity / jump defect at the shells, relative to |u(R)|."""
        p = self.problem
        ap, am = p.coupling.alpha_plus, p.coupling.alpha_minus
        rm, rp = p.radii
        shells = [(p.R, ap + am)] if p.epsilon == 0 else [(rm, am), (rp, ap)]
        worst = 0.0
        for r, a in shells:
            vin, vout = self.u(r, -1), self.u(r, 1)
            jump = self.du(r, 1) - self.du(r, -1) - a * vout
            worst = max(worst, abs(vout - vin), abs(jump))
        return worst / abs(self.trace_psi0)

    # angular part ----------------------------------------------------
    def angular_values(self, surface):
        p = self.problem
        if p.dimension == 2:
            theta = surface.nodes
            return np.cos(p.m * theta) if self.angular == "cos" else np.sin(p.m * theta)
        theta, phi = surface.angles()
        if p.m == 0:
            return np.ones_like(theta)
        leg = special.lpmv(1, p.m, np.cos(theta))
        return leg * (np.cos(phi) if self.angular == "cos" else np.sin(phi))


def _angular_norm(d, m):
    if d == 2:
        return 2.0 * math.pi if m == 0 else math.pi
    if m == 0:
        return 4.0 * math.pi
    return math.pi * 2.0 * math.factorial(m + 1) / ((2 * m + 1) * math.factorial(m - 1))


def _radial_norm(data):
    """Int_0^inf u^2 r^(d-1) dr = Int Z^2 r dr, piecewise adaptive quadrature."""
    p = data.problem
    rm, rp = p.radii
    r_max = rp + TAIL_LENGTH / data.kappa.real
    pieces = [(0.0, rm, 0), (rp, r_max, 2)]
    if p.epsilon > 0:
        pieces.insert(1, (rm, rp, 1))
    total = 0j
    for a, b, piece in pieces:
        val, _ = integrate.quad(lambda r: data._z(r, piece, False) ** 2 * r, a, b,
                                epsabs=1e-15, epsrel=1e-13, limit=200, complex_func=True)
        total += val
    return total


def solve_eigenvalue(p, seed=None, angular="cos", tol=1e-12):
    """Eigenvalue of the sector problem nearest the seed (a kappa value).

    Without a seed an eps > 0 problem starts from the eps = 0 root, which in
    turn starts from :func:`default_seed`.
    """
    if seed is None:
        seed = default_seed(p) if p.epsilon == 0 else solve_eigenvalue(p.limit()).kappa
    seed = complex(seed)
    if not seed.real > 0:
        raise DomainError("seed kappa must have positive real part")
    try:
        kappa = find_root_complex(lambda k: secular_det(k, p), seed, tol=tol)
    except NoConvergenceError as exc:
        raise NoBoundStateError(f"no sector eigenvalue found from seed {seed}") from exc
    if not kappa.real > 0:
        raise NoBoundStateError(f"root kappa={kappa} is not a bound state")
    M = matching_matrix(kappa, p)
    sv = np.linalg.svd(M, compute_uv=False)
    ratio = float(sv[-1] / sv[0])
    if ratio > CERTIFY_RATIO:
        raise NoBoundStateError(f"kappa={kappa} not certified: sigma ratio {ratio:.2e}")
    vec = smallest_singular(M).vector
    if p.epsilon == 0:
        A, D = vec
        coeffs = (A, 0.0, 0.0, D)
    else:
        coeffs = tuple(vec)
    probe = RadialEigenData(p, kappa, coeffs, 1.0, 0.0, 0.0, 1.0, angular, ratio)
    uR = probe.u(p.R, 1)
    if uR == 0:
        raise NormalizationError("radial factor vanishes at R")
    coeffs = tuple(complex(c) / uR for c in coeffs)
    data = RadialEigenData(p, kappa, coeffs, 1.0, 0.0, 0.0, 1.0, angular, ratio)
    norm = _radial_norm(data) * _angular_norm(p.dimension, p.m)
    if norm == 0:
        raise NormalizationError("eigenfunction has zero bilinear norm")
    return replace(
        data,
        trace_psi0=data.u(p.R, 1),
        trace_dn_plus=data.du(p.R, 1),
        trace_dn_minus=data.du(p.R, -1),
        norm_sq=norm,
    )


def _surface(p, samples):
    if p.dimension == 2:
        return Circle(p.R, samples)
    n_theta = max(8, samples // 8)
    return Sphere(p.R, n_theta, 2 * n_theta)


def trace_bundle(data, samples=64):
    """Surface traces of the limit eigenfunction for the slope formulas."""
    p = data.problem
    if p.epsilon != 0:
        raise DomainError("trace bundles describe the eps = 0 eigenfunction")
    surf = _surface(p, samples)
    Y = data.angular_values(surf)
    K1 = np.full(Y.shape, -1.0 / p.R)
    return TraceBundle(
        surface=surf,
        psi0=data.trace_psi0 * Y,
        dn_plus=data.trace_dn_plus * Y,
        dn_minus=data.trace_dn_minus * Y,
        K1=K1,
        dimension=p.dimension,
        norm_sq=data.norm_sq,
    )


def predicted_slope(p, samples=64):
    """lambda_0' of the sector eigenvalue from the limit traces."""
    data = solve_eigenvalue(p.limit())
    return slope_simple(trace_bundle(data, samples), p.coupling)


def degenerate_pair(p, seed=None):
    """The cos- and sin-type eigenfunctions of a level with m >= 1.

    Both share one kappa; they are orthogonal in the bilinear pairing
    because the angular factors are.
    """
    if p.m < 1:
        raise DomainError("degenerate pairs need m >= 1")
    first = solve_eigenvalue(p, seed, angular="cos")
    second = replace(first, angular="sin")
    return first, second


def degenerate_slopes(p, samples=64):
    """Slope matrix of the limit m >= 1 pair."""
    pair = degenerate_pair(p.limit())
    return slope_matrix([trace_bundle(d, samples) for d in pair], p.coupling)
