import numpy as np
import pytest

from leakylayers import Coupling
from leakylayers import bs_integral as bs
from leakylayers.asymptotics import slope_matrix, slope_simple
from leakylayers.errors import DomainError, NoBoundStateError
from leakylayers.geometry import Circle, Ellipse, FourierCurve
from leakylayers.numerics import extrapolate, fit_expansion, smallest_singular
from leakylayers.radial import RadialProblem, solve_eigenvalue
from leakylayers.radial import trace_bundle as radial_bundle

N = 256
C = Coupling(-3, -2)
C5 = Coupling(-2.5, -2.5)
CIRCLE = Circle(1.0)
ELLIPSE = Ellipse(1.5, 1.0)
SWEEP = [1e-2, 5e-3, 2.5e-3, 1.25e-3]

# mpmath bisection of 1 - 5 I0(k) K0(k)
KAPPA_CIRCLE_ALPHA5 = 2.5608613440339273868


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture(scope="module")
def ellipse_kappa():
    return bs.ground_state_kappa(ELLIPSE, C, N)


def test_zero_coupling_gives_identity():
    M = bs.build_block(1.0, CIRCLE, 0.0, Coupling(0, 0), 64).matrix
    np.testing.assert_array_equal(M, np.eye(64))


def test_input_validation():
    with pytest.raises(DomainError):
        bs.build_block(1.0, CIRCLE, 0.0, C, 31)
    with pytest.raises(DomainError):
        bs.build_block(1.0, CIRCLE, 0.0, C, 16)
    with pytest.raises(DomainError):
        bs.build_block(1.0, CIRCLE, 0.95, C, 64)
    with pytest.raises(DomainError):
        bs.build_block(-1.0, CIRCLE, 0.0, C, 64)


def test_relabeling_gives_permutation_similar_matrix():
    # rotating the parameter of a circle relabels nodes cyclically
    M = bs.build_block(1.3, CIRCLE, 0.05, C, 64).matrix
    shift = np.roll(np.arange(64), 5)
    perm = np.concatenate([shift, 64 + shift])
    np.testing.assert_allclose(M[np.ix_(perm, perm)], M, atol=1e-13)


def test_cross_blocks_are_transposes_up_to_weights():
    # the kernel is symmetric; the near-field quadrature makes the discrete
    # blocks symmetric only up to a spectrally small error
    gaps = []
    for n in (64, 128, 256):
        asm = bs.assembler(ELLIPSE, 0.05, C, n)
        S_pm = asm.single_layer(1.7, 0, 1) / asm.grid.speeds[1][None, :]
        S_mp = asm.single_layer(1.7, 1, 0) / asm.grid.speeds[0][None, :]
        gaps.append(np.max(np.abs(S_pm - S_mp.T)))
    assert gaps[2] < 1e-8
    assert gaps[0] > 10 * gaps[1] > 100 * gaps[2]


def test_single_layer_on_circle_modes():
    # S e^{i m s} on the unit circle = I_m(k) K_m(k) e^{i m s}
    from scipy.special import iv, kv

    k = 1.7
    S = bs.assembler(CIRCLE, 0.0, C5, 64).single_layer(k, 0, 0)
    s = CIRCLE.with_samples(64).nodes
    for m in (0, 1, 3):
        v = np.cos(m * s)
        np.testing.assert_allclose(S @ v, iv(m, k) * kv(m, k) * v, atol=1e-13)


def test_singular_at_radial_kappa():
    M = bs.build_block(KAPPA_CIRCLE_ALPHA5, CIRCLE, 0.0, C5, N).matrix
    assert smallest_singular(M).value < 1e-8


def test_circle_eigenvalue_matches_radial():
    lam = bs.find_eigenvalue(CIRCLE, 0.0, C5, 2.5, N)
    assert rel(lam, -KAPPA_CIRCLE_ALPHA5**2) < 1e-12


def test_two_curve_eigenvalue_matches_radial():
    want = solve_eigenvalue(RadialProblem(2, 1.0, 1e-2, C)).lam
    got = bs.find_eigenvalue(CIRCLE, 1e-2, C, np.sqrt(-want), N)
    assert rel(got, want) < 1e-6


def test_complex_coupling_matches_radial():
    c = Coupling(-3 + 0.5j, -2)
    want = solve_eigenvalue(RadialProblem(2, 1.0, 2e-2, c))
    got = bs.find_eigenvalue(CIRCLE, 2e-2, c, want.kappa * 1.01, 128)
    assert rel(got, want.lam) < 1e-6


def test_no_kernel_point_is_reported():
    with pytest.raises(NoBoundStateError):
        bs.locate_kernel(CIRCLE, 0.0, Coupling(-0.1, -0.1), 5.0, 64)


def test_ellipse_self_convergence(ellipse_kappa):
    k256 = bs.locate_kernel(ELLIPSE, 0.0, C5, ellipse_kappa, 256)[0]
    k512 = bs.locate_kernel(ELLIPSE, 0.0, C5, k256, 512)[0]
    assert abs(k256**2 - k512**2) < 1e-8


def test_ground_state_rejects_discretization_modes(ellipse_kappa):
    # at eps = 0 only the total coupling matters; frozen reference from the N = 512 solve
    assert abs(ellipse_kappa - 2.548764768640845) < 1e-11
    assert abs(bs.ground_state_kappa(ELLIPSE, C5, 128) - ellipse_kappa) < 1e-11


def test_resolution_measure():
    s = 2 * np.pi * np.arange(64) / 64
    assert bs.resolution(np.exp(np.cos(s)), 64) < 1e-15
    assert bs.resolution((-1.0) ** np.arange(64), 64) == pytest.approx(1.0)


def test_circle_traces_match_radial():
    data = solve_eigenvalue(RadialProblem(2, 1.0, 0.0, C))
    tr = bs.eigen_traces(CIRCLE, C, data.kappa, N)
    psi, dp, dm = tr.normalized()
    scale = 1 / np.sqrt(data.norm_sq)
    # rotational symmetry: constant traces
    assert np.ptp(np.abs(psi)) < 1e-8 * np.max(np.abs(psi))
    sign = np.sign((psi[0] / (scale * data.trace_psi0)).real)
    assert rel(sign * psi[0], scale * data.trace_psi0) < 1e-6
    assert rel(sign * dp[0], scale * data.trace_dn_plus) < 1e-6
    assert rel(sign * dm[0], scale * data.trace_dn_minus) < 1e-6
    assert rel(tr.norm_sq / tr.psi0[0] ** 2, data.norm_sq / data.trace_psi0**2) < 1e-6


def test_jump_residual_self_certification(ellipse_kappa):
    tr = bs.eigen_traces(ELLIPSE, C, ellipse_kappa, N)
    gap = tr.dn_plus - tr.dn_minus - C.total * tr.psi0
    assert np.max(np.abs(gap)) <= 1e-7 * np.max(np.abs(tr.psi0))
    assert tr.residual <= 1e-7


def test_traces_reject_non_kernel_point():
    with pytest.raises(NoBoundStateError):
        bs.eigen_traces(CIRCLE, C, 1.0, 64)


def test_circle_slope_matches_radial_sweep():
    data = solve_eigenvalue(RadialProblem(2, 1.0, 0.0, C))
    tr = bs.eigen_traces(CIRCLE, C, data.kappa, N)
    pts = [(e, solve_eigenvalue(RadialProblem(2, 1.0, e, C)).lam) for e in SWEEP]
    fitted = fit_expansion(pts, 2).coefficients[1]
    assert rel(fitted, slope_simple(tr.bundle(), C)) < 5e-3


def test_ellipse_slope_matches_two_curve_sweep(ellipse_kappa):
    tr = bs.eigen_traces(ELLIPSE, C, ellipse_kappa, N)
    pred = slope_simple(tr.bundle(), C)
    pts = []
    lam0 = -ellipse_kappa**2
    for e in SWEEP:
        seed = np.sqrt(-(lam0 + pred * e))
        pts.append((e, bs.find_eigenvalue(ELLIPSE, e, C, seed, N)))
    fitted = fit_expansion(pts, 2).coefficients[1]
    assert rel(fitted, pred) < 1e-2
    assert rel(extrapolate(pts).coefficients[1], pred) < 1e-3


def test_degenerate_circle_level():
    data = solve_eigenvalue(RadialProblem(2, 1.0, 0.0, C, 1))
    traces = bs.eigen_traces(CIRCLE, C, data.kappa, N, multiplicity=2)
    G = bs.gram_matrix(traces, C, N)
    res = slope_matrix([t.bundle() for t in traces], C, G)
    assert abs(res.slopes[0] - res.slopes[1]) < 1e-8 * abs(res.slopes[0])
    radial = slope_simple(radial_bundle(data), C)
    assert rel(res.slopes[0], radial) < 1e-6


def test_shell_traces_on_circle():
    p = RadialProblem(2, 1.0, 1e-2, C)
    data = solve_eigenvalue(p)
    kappa, _ = bs.locate_kernel(CIRCLE, 1e-2, C, data.kappa, N)
    sh = bs.shell_traces(CIRCLE, 1e-2, C, kappa, N)
    plus, minus = sh.normalized()
    s = 1 / np.sqrt(data.norm_sq)
    want_plus = s * data.u(p.radii[1])
    want_minus = s * data.u(p.radii[0])
    sign = np.sign((plus[0] / want_plus).real)
    assert rel(sign * plus[0], want_plus) < 1e-6
    assert rel(sign * minus[0], want_minus) < 1e-6
    with pytest.raises(DomainError):
        bs.shell_traces(CIRCLE, 0.0, C, kappa, N)


def test_spectral_convergence_on_lobed_curve():
    # the four-lobed curve still has visible discretization error at small N;
    # ellipses and circles reach the rounding floor already at N = 32
    curve = FourierCurve((1.0, 0.0, 0.0, 0.0, 0.2))
    k = bs.ground_state_kappa(curve, C5, 128, steps=60)
    ref = bs.locate_kernel(curve, 0.0, C5, k, 512)[0] ** 2
    err = {n: abs(bs.locate_kernel(curve, 0.0, C5, k, n)[0] ** 2 - ref) for n in (32, 64, 128)}
    assert err[64] / err[32] < 0.1
    assert err[128] / err[64] < 0.1
    assert err[128] < 1e-11
