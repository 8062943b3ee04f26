"""Birman-Schwinger boundary-integral solver for delta interactions on one or
two parallel closed curves in the plane.

With ``G = K0(kappa |x - y|) / (2 pi)`` and ``psi = SL[phi]`` the jump
``dn_plus - dn_minus = alpha psi`` forces ``phi = -alpha psi``, so the trace
``u = psi|_curves`` solves ``(I + S diag(alpha)) u = 0``.  Eigenvalues
``-kappa^2`` are the kappa where that block matrix is singular.

Quadrature
----------
Every kernel used here has the form ``k(r) = L(r) log r^2 + smooth`` with
``L`` entire in ``r^2``.  For a target x and a source curve y(s) the
analytically continued ``r^2(s) = (x - y(s)).(x - y(s))`` has a conjugate
pair of zeros ``a +- ib``, and ``g(s) = log(2 cosh b - 2 cos(s - a))``
carries the same logarithmic behaviour.  Integrating ``L g f`` exactly
against the trigonometric interpolant of ``L f`` gives the weights

    W_j = (2 pi / N) [ b - 2 sum_{k<N/2} e^{-kb} cos(k(a - s_j)) / k
                         - e^{-Nb/2} cos(N(a - s_j)/2) / (N/2) ]

and the rest, ``k - L g``, is smooth and goes to the trapezoid rule.  On a
curve's own block ``b = 0`` and this is the classical Kress rule; between
two close parallel curves ``b ~ 2 eps / |y'|`` and the same weights remove
the near-singularity that defeats plain trapezoid when ``N eps`` is small.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .asymptotics import TraceBundle
from .coupling import Coupling
from .errors import ConsistencyError, DomainError, NoBoundStateError, NoConvergenceError
from .geometry import curvature, max_parallel_range, parallel_offset
from .numerics import find_root_complex

__all__ = [
    "NystromGrid",
    "BlockOperator",
    "Assembler",
    "EigenTraces",
    "ShellTraces",
    "build_block",
    "assembler",
    "locate_kernel",
    "find_eigenvalue",
    "real_brackets",
    "ground_state_kappa",
    "resolution",
    "eigen_traces",
    "shell_traces",
    "gram_matrix",
]

CERTIFY_RATIO = 1e-7
SELF_TEST_TOL = 1e-7
TRAPEZOID_ENOUGH = 40.0  # plain trapezoid error ~ exp(-N b)


@dataclass(frozen=True)
class NystromGrid:
    curves: tuple
    N: int
    nodes: np.ndarray
    positions: tuple  # per curve, (2, N)
    speeds: tuple  # per curve, (N,)

    @property
    def weight(self):
        return 2.0 * np.pi / self.N


@dataclass(frozen=True)
class BlockOperator:
    matrix: np.ndarray
    grid: NystromGrid
    alphas: tuple
    kappa: complex


@dataclass(frozen=True)
class _Block:
    r: np.ndarray  # distances, diagonal zero on self blocks
    diff: np.ndarray  # x_i - y_j, (2, N, N)
    g: np.ndarray  # log(2 cosh b - 2 cos(s - a)); only meaningful on corrected rows
    W: np.ndarray  # product weights for L * g
    corrected: np.ndarray  # (N,) bool, rows using the split
    self_block: bool


def _complex_zeros(target, curve, seeds, guess_b, iterations=40):
    """Zeros ``s = a + ib`` (b >= 0) of r^2 between targets and a source curve."""
    s = seeds + 1j * guess_b
    ok = np.zeros(s.shape, dtype=bool)
    for _ in range(iterations):
        pos, vel = curve.position(s), curve.velocity(s)
        d = target - pos
        F = d[0] ** 2 + d[1] ** 2
        dF = -2.0 * (d[0] * vel[0] + d[1] * vel[1])
        step = F / dF
        s = s - step
        ok = np.abs(step) < 1e-14 * (1.0 + np.abs(s))
        if np.all(ok):
            break
    return s.real, np.abs(s.imag), ok


def _weights(a, b, nodes):
    """Product weights for ``Int log(2 cosh b - 2 cos(s - a)) f(s) ds``."""
    N = nodes.size
    k = np.arange(1, N // 2)
    decay = np.exp(-np.outer(b, k)) / k  # (rows, k)
    ca, sa = np.cos(np.outer(a, k)), np.sin(np.outer(a, k))
    cs, ss = np.cos(np.outer(k, nodes)), np.sin(np.outer(k, nodes))
    series = (decay * ca) @ cs + (decay * sa) @ ss
    tail = np.exp(-N * b / 2)[:, None] * np.cos(N * (a[:, None] - nodes[None, :]) / 2) / (N / 2)
    return (2.0 * np.pi / N) * (b[:, None] - 2.0 * series - tail)


def _make_block(target_curve, source_curve, nodes, self_block):
    X = np.real(target_curve.position(nodes))
    Y = np.real(source_curve.position(nodes))
    diff = X[:, :, None] - Y[:, None, :]
    r = np.hypot(diff[0], diff[1])
    N = nodes.size
    if self_block:
        a, b = nodes.copy(), np.zeros(N)
        corrected = np.ones(N, dtype=bool)
    else:
        gap = r[np.arange(N), np.arange(N)]
        speed = np.real(source_curve.speed(nodes))
        a, b, ok = _complex_zeros(X, source_curve, nodes.astype(complex), gap / speed)
        corrected = ok & (b * N < TRAPEZOID_ENOUGH)
        a = np.where(corrected, a, 0.0)
        b = np.where(corrected, b, 1.0)
    with np.errstate(divide="ignore"):
        g = np.log(2.0 * np.cosh(b)[:, None] - 2.0 * np.cos(nodes[None, :] - a[:, None]))
    if self_block:
        np.fill_diagonal(g, 0.0)
    W = _weights(a, b, nodes)
    W[~corrected] = 0.0
    g[~corrected] = 0.0
    return _Block(r=r, diff=diff, g=g, W=W, corrected=corrected, self_block=self_block)


class Assembler:
    """Geometry-only parts of the block system, reused for every kappa."""

    def __init__(self, sigma0, epsilon, coupling, N):
        if N % 2 or N < 32:
            raise DomainError("N must be even and at least 32")
        if not epsilon >= 0:
            raise DomainError("eps must be non-negative")
        if epsilon >= max_parallel_range(sigma0):
            raise DomainError("eps beyond the admissible parallel range")
        self.sigma0 = sigma0.with_samples(N)
        self.epsilon = float(epsilon)
        self.coupling = coupling
        self.N = N
        nodes = self.sigma0.nodes
        if epsilon == 0:
            curves = (self.sigma0,)
            alphas = (coupling.total,)
        else:
            curves = (parallel_offset(self.sigma0, epsilon), parallel_offset(self.sigma0, -epsilon))
            alphas = (coupling.alpha_plus, coupling.alpha_minus)
        self.alphas = alphas
        self.grid = NystromGrid(
            curves=curves,
            N=N,
            nodes=nodes,
            positions=tuple(np.real(c.position(nodes)) for c in curves),
            speeds=tuple(np.real(c.speed(nodes)) for c in curves),
        )
        n = len(curves)
        self.blocks = [[_make_block(curves[i], curves[j], nodes, i == j) for j in range(n)]
                       for i in range(n)]

    # --- generic split-kernel matrices ---------------------------------
    def _split(self, blk, k_vals, L_vals, diag_smooth):
        """Quadrature matrix (no speed factor) for ``k = L log r^2 + smooth``."""
        h = self.grid.weight
        out = np.where(blk.corrected[:, None], blk.W * L_vals + h * (k_vals - L_vals * blk.g),
                       h * k_vals)
        if blk.self_block:
            idx = np.arange(self.N)
            out[idx, idx] = blk.W[idx, idx] * L_vals[idx, idx] + h * diag_smooth
        return out

    @staticmethod
    def _bessel_args(kappa, r, self_block):
        z = kappa * r
        if self_block:
            z = z.copy()
            np.fill_diagonal(z, 1.0)
        return z

    def single_layer(self, kappa, i, j):
        """Block (i, j) of S including the source speed: (S phi)_i = sum S_ij phi_j."""
        blk = self.blocks[i][j]
        z = self._bessel_args(kappa, blk.r, blk.self_block)
        K0, I0 = _k(0, z), _i(0, z)
        diag = None
        if blk.self_block:
            sp = self.grid.speeds[i]
            diag = -np.log(kappa / 2.0) - np.euler_gamma - np.log(sp)
            np.fill_diagonal(I0, 1.0)
        mat = self._split(blk, K0, -0.5 * I0, diag)
        return mat * self.grid.speeds[j][None, :] / (2.0 * np.pi)

    def matrix(self, kappa):
        kappa = _as_kappa(kappa)
        n = len(self.grid.curves)
        rows = []
        for i in range(n):
            rows.append([self.single_layer(kappa, i, j) * self.alphas[j] for j in range(n)])
        M = np.block(rows)
        M[np.diag_indices_from(M)] += 1.0
        return BlockOperator(matrix=M, grid=self.grid, alphas=self.alphas, kappa=kappa)

    def slogdet(self, kappa):
        sign, logabs = np.linalg.slogdet(self.matrix(kappa).matrix)
        return sign, logabs

    def adjoint_double_layer(self, kappa):
        """K' on the single curve (eps = 0): (K' phi)(x) = Int dn_x G(x - y) phi(y) ds_y."""
        if len(self.grid.curves) != 1:
            raise DomainError("normal traces are only assembled for the limit curve")
        blk = self.blocks[0][0]
        curve = self.sigma0
        nodes = self.grid.nodes
        nx = np.real(curve.normal(nodes))
        proj = blk.diff[0] * nx[0][:, None] + blk.diff[1] * nx[1][:, None]
        z = self._bessel_args(kappa, blk.r, True)
        r = blk.r.copy()
        np.fill_diagonal(r, 1.0)
        proj_r = proj / r
        K1, I1 = _k(1, z), _i(1, z)
        _, d1, d2 = curve.derivatives(nodes)
        d1, d2 = np.real(d1), np.real(d2)
        sp2 = d1[0] ** 2 + d1[1] ** 2
        diag = -(nx[0] * d2[0] + nx[1] * d2[1]) / (2.0 * sp2) / kappa
        L = 0.5 * I1 * proj_r
        np.fill_diagonal(L, 0.0)
        mat = self._split(blk, K1 * proj_r, L, diag)
        return -(kappa / (2.0 * np.pi)) * mat * self.grid.speeds[0][None, :]

    def norm_kernel(self, kappa, i, j):
        """Quadrature matrix of ``Int Int phi phi r K1(kappa r) ds ds`` (both speeds)."""
        blk = self.blocks[i][j]
        z = self._bessel_args(kappa, blk.r, blk.self_block)
        rK1 = blk.r * _k(1, z)
        L = 0.5 * blk.r * _i(1, z)
        diag = None
        if blk.self_block:
            np.fill_diagonal(L, 0.0)
            diag = np.full(self.N, 1.0 / kappa)
        mat = self._split(blk, rK1, L, diag)
        h = self.grid.weight
        return h * self.grid.speeds[i][:, None] * mat * self.grid.speeds[j][None, :]


def _as_kappa(kappa):
    kappa = complex(kappa)
    if not kappa.real > 0:
        raise DomainError("Re kappa must be positive")
    return kappa.real if kappa.imag == 0 else kappa


def _k(order, z):
    if np.isrealobj(z):
        return special.k0(z) if order == 0 else special.k1(z)
    return special.kv(order, z)


def _i(order, z):
    if np.isrealobj(z):
        return special.i0(z) if order == 0 else special.i1(z)
    return special.iv(order, z)


@functools.lru_cache(maxsize=16)
def assembler(sigma0, epsilon, coupling, N):
    return Assembler(sigma0, float(epsilon), coupling, int(N))


def build_block(kappa, sigma0, epsilon, c, N):
    """Nystrom matrix of ``I + S(kappa) diag(alpha)`` (one block per curve)."""
    return assembler(sigma0, float(epsilon), _coupling(c), int(N)).matrix(kappa)


def _coupling(c):
    return c if isinstance(c, Coupling) else Coupling(*c)


def _certificate(M):
    sv = np.linalg.svd(M, compute_uv=False)
    return float(sv[-1] / sv[0])


def locate_kernel(sigma0, epsilon, c, seed, N, tol=1e-11):
    """kappa where the block matrix is singular, and its certificate sigma_min/sigma_max.

    The root function is ``det M(kappa)`` from the LU log-determinant,
    divided by ``|det M(seed)| / sigma_min(seed)`` (the product of the other
    singular values at the seed).  That keeps it O(sigma_min) near the seed
    and analytic in kappa.
    """
    asm = assembler(sigma0, float(epsilon), _coupling(c), int(N))
    seed = complex(seed)
    if not seed.real > 0:
        raise DomainError("seed kappa must have positive real part")
    _, l0 = asm.slogdet(seed)
    smin = float(np.linalg.svd(asm.matrix(seed).matrix, compute_uv=False)[-1])
    if smin == 0.0:
        return seed, 0.0
    ref = l0 - math.log(smin)

    def scaled_det(k):
        sign, logabs = asm.slogdet(k)
        return sign * math.exp(logabs - ref)

    try:
        kappa = find_root_complex(scaled_det, seed, tol=tol)
    except (NoConvergenceError, DomainError) as exc:
        raise NoBoundStateError(f"no kernel point found from seed {seed}") from exc
    if not kappa.real > 0:
        raise NoBoundStateError(f"root kappa={kappa} is not a bound state")
    cert = _certificate(asm.matrix(kappa).matrix)
    if cert > CERTIFY_RATIO:
        raise NoBoundStateError(f"kappa={kappa} not certified: sigma ratio {cert:.2e}")
    return kappa, cert


def resolution(vector, N):
    """Share of a null vector's energy in the top half of its frequency band.

    Physical eigenfunctions on analytic curves have rapidly decaying
    Fourier coefficients; kernel points whose null vectors sit near the
    Nyquist frequency are artefacts of the discretization.
    """
    blocks = np.asarray(vector).reshape(-1, N)
    spec = np.abs(np.fft.fft(blocks, axis=1)) ** 2
    freq = np.abs(np.fft.fftfreq(N, 1.0 / N))
    return float(spec[:, freq >= N / 4].sum() / spec.sum())


def real_brackets(sigma0, epsilon, c, N, kappas):
    """Consecutive pairs of real kappa between which det M changes sign.

    Only meaningful for real couplings, where M(kappa) is real for real
    kappa.  Dense families of bound states (strong coupling, long curves)
    leave Newton on the determinant little room, so a scan like this is
    the reliable way to seed a particular level.
    """
    c = _coupling(c)
    if c.alpha_plus.imag or c.alpha_minus.imag:
        raise DomainError("sign scans need real couplings")
    asm = assembler(sigma0, float(epsilon), c, int(N))
    kappas = np.sort(np.asarray(kappas, dtype=float))
    signs = [asm.slogdet(k)[0].real for k in kappas]
    return [(kappas[i], kappas[i + 1]) for i in range(len(kappas) - 1)
            if signs[i] * signs[i + 1] < 0]


def ground_state_kappa(sigma0, c, N, kappa_max=None, steps=200, max_tail=1e-8):
    """Largest resolved real kernel point of the eps = 0 system (real couplings).

    Candidates are taken from the top of the scan down; one whose null
    vector fails :func:`resolution` is discarded as a discretization mode.
    """
    c = _coupling(c)
    top = kappa_max or 1.5 * abs(c.total.real) / 2.0 + 1.0
    brackets = real_brackets(sigma0, 0.0, c, N, np.linspace(0.02 * top, top, steps))
    asm = assembler(sigma0, 0.0, c, int(N))
    for lo, hi in reversed(brackets):
        try:
            kappa, _ = locate_kernel(sigma0, 0.0, c, 0.5 * (lo + hi), N)
        except NoBoundStateError:
            continue
        if not lo <= kappa.real <= hi:
            continue
        vec, _ = _null_space(asm.matrix(kappa).matrix, 1)
        if resolution(vec[:, 0], asm.N) <= max_tail:
            return kappa
    raise NoBoundStateError("no resolved sign change of the determinant on the scanned range")


def find_eigenvalue(sigma0, epsilon, c, seed, N):
    """Eigenvalue ``-kappa^2`` nearest the seed (a kappa value)."""
    kappa, _ = locate_kernel(sigma0, epsilon, c, seed, N)
    return -kappa**2


@dataclass(frozen=True)
class EigenTraces:
    """Limit-curve traces of an unnormalized eigenfunction ``psi = SL[phi]``."""

    curve: object
    kappa: complex
    psi0: np.ndarray
    dn_plus: np.ndarray
    dn_minus: np.ndarray
    density: np.ndarray
    norm_sq: complex
    residual: float

    def normalized(self):
        """Arrays scaled so that ``Int psi^2 = 1`` (principal square root)."""
        s = 1.0 / np.sqrt(complex(self.norm_sq))
        return s * self.psi0, s * self.dn_plus, s * self.dn_minus

    def bundle(self):
        field = curvature(self.curve)
        return TraceBundle(self.curve, self.psi0, self.dn_plus, self.dn_minus,
                           field.K1, 2, self.norm_sq)


def _null_space(M, k):
    _, sv, vh = np.linalg.svd(M)
    return vh[-k:].conj().T, sv


def eigen_traces(sigma0, c, kappa, N, multiplicity=1):
    """Traces of the eps = 0 eigenfunction(s) at a certified kernel point.

    With ``multiplicity > 1`` the right singular vectors of the smallest
    singular values span the eigenspace and a list is returned; combine
    with :func:`gram_matrix` for the slope matrix.
    """
    c = _coupling(c)
    asm = assembler(sigma0, 0.0, c, int(N))
    kappa = _as_kappa(kappa)
    op = asm.matrix(kappa)
    vecs, sv = _null_space(op.matrix, multiplicity)
    if sv[-multiplicity] / sv[0] > CERTIFY_RATIO:
        raise NoBoundStateError("kappa is not a kernel point of the requested multiplicity")
    alpha = c.total
    S = asm.single_layer(kappa, 0, 0)
    Kp = asm.adjoint_double_layer(kappa)
    Nk = asm.norm_kernel(kappa, 0, 0)
    out = []
    for col in vecs.T:
        u = col / col[np.argmax(np.abs(col))]
        phi = -alpha * u
        psi = S @ phi
        scale = np.max(np.abs(psi))
        rebuild = float(np.max(np.abs(psi - u)) / scale)
        dn_plus = -0.5 * phi + Kp @ phi
        dn_minus = 0.5 * phi + Kp @ phi
        jump = float(np.max(np.abs(dn_plus - dn_minus - alpha * psi)) / scale)
        if max(rebuild, jump) > SELF_TEST_TOL:
            raise ConsistencyError(f"trace self-test failed: rebuild {rebuild:.2e}, jump {jump:.2e}")
        norm = complex(phi @ Nk @ phi) / (4.0 * np.pi * kappa)
        out.append(EigenTraces(asm.sigma0, kappa, psi, dn_plus, dn_minus, phi, norm,
                               max(rebuild, jump)))
    return out[0] if multiplicity == 1 else out


def gram_matrix(traces, c, N):
    """Bilinear pairings ``Int psi_a psi_b`` of limit eigenfunctions."""
    first = traces[0]
    asm = assembler(first.curve, 0.0, _coupling(c), int(N))
    Nk = asm.norm_kernel(first.kappa, 0, 0)
    Nk = 0.5 * (Nk + Nk.T)
    dens = np.array([t.density for t in traces])
    return dens @ Nk @ dens.T / (4.0 * np.pi * first.kappa)


@dataclass(frozen=True)
class ShellTraces:
    """Eigenfunction values on the two shells for eps > 0."""

    kappa: complex
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    norm_sq: complex

    def normalized(self):
        s = 1.0 / np.sqrt(complex(self.norm_sq))
        return s * self.psi_plus, s * self.psi_minus


def shell_traces(sigma0, epsilon, c, kappa, N):
    """psi on the offset curves and ``Int psi^2`` at a certified kernel point."""
    if not epsilon > 0:
        raise DomainError("shell traces need eps > 0")
    c = _coupling(c)
    asm = assembler(sigma0, float(epsilon), c, int(N))
    kappa = _as_kappa(kappa)
    op = asm.matrix(kappa)
    vecs, sv = _null_space(op.matrix, 1)
    if sv[-1] / sv[0] > CERTIFY_RATIO:
        raise NoBoundStateError("kappa is not a kernel point")
    u = vecs[:, 0]
    u = u / u[np.argmax(np.abs(u))]
    n = asm.N
    phi = -np.concatenate([asm.alphas[0] * u[:n], asm.alphas[1] * u[n:]])
    norm = 0j
    for i in range(2):
        for j in range(2):
            blk = asm.norm_kernel(kappa, i, j)
            norm += phi[i * n:(i + 1) * n] @ blk @ phi[j * n:(j + 1) * n]
    return ShellTraces(kappa, u[:n], u[n:], norm / (4.0 * np.pi * kappa))
