import cmath

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leakylayers.errors import DomainError, NoConvergenceError, RangeError
from leakylayers.numerics import (
    bessel_i,
    bessel_i_prime,
    bessel_k,
    bessel_k_prime,
    eigenvalues_small,
    extrapolate,
    find_root_complex,
    fit_expansion,
    loglog_slope,
    muller,
    smallest_singular,
)
from leakylayers.numerics.linalg import characteristic_polynomial, durand_kerner

ORDERS = [0, 0.5, 1, 1.5, 2, 3]


def grid():
    re = np.linspace(0.1, 30.0, 9)
    im = np.linspace(-5.0, 5.0, 7)
    return (re[:, None] + 1j * im[None, :]).ravel()


def rel(a, b):
    return abs(a - b) / abs(b)


# --- Bessel functions --------------------------------------------------------


def test_i0_near_zero_is_one():
    assert bessel_i(0, 1e-30) == pytest.approx(1.0, abs=1e-15)


def test_i0_at_one_matches_series_oracle():
    # 40-digit mpmath value of the ascending series
    assert rel(bessel_i(0, 1.0), 1.26606587775200833559824462521) < 1e-14


def test_i_half_closed_form():
    # sqrt(2/(pi z)) sinh z at z = 1
    assert rel(bessel_i(0.5, 1.0), 0.937674888245487646717262884391) < 1e-14


def test_k_half_closed_form():
    # sqrt(pi/(2z)) exp(-z) at z = 2
    assert rel(bessel_k(0.5, 2.0), 0.119937771968061447368036501637) < 1e-14


def test_k0_integral_oracle():
    # Int_0^inf exp(-cosh t) dt in extended precision
    assert rel(bessel_k(0, 1.0), 0.421024438240708333335627379213) < 1e-14


def test_wronskian_at_one_point():
    z = 1.7
    w = bessel_i(1, z) * bessel_k_prime(1, z) - bessel_i_prime(1, z) * bessel_k(1, z)
    assert w == pytest.approx(-1 / z, rel=1e-13)


@pytest.mark.parametrize("nu", ORDERS)
def test_values_against_mpmath_on_grid(nu):
    mp.mp.dps = 30
    z = grid()
    got_i, got_k = bessel_i(nu, z), bessel_k(nu, z)
    for zi, gi, gk in zip(z, got_i, got_k):
        arg = mp.mpc(zi.real, zi.imag)
        want_i = complex(mp.besseli(nu, arg))
        want_k = complex(mp.besselk(nu, arg))
        assert rel(gi, want_i) < 1e-12, (nu, zi)
        assert rel(gk, want_k) < 1e-12, (nu, zi)


@pytest.mark.parametrize("nu", ORDERS)
def test_wronskian_identity_on_grid(nu):
    z = grid()
    w = bessel_i(nu, z) * bessel_k_prime(nu, z) - bessel_i_prime(nu, z) * bessel_k(nu, z)
    assert np.max(np.abs(w * z + 1.0)) < 1e-10


@pytest.mark.parametrize("nu", [1, 1.5, 2, 3])
def test_recurrence_consistency(nu):
    z = grid()
    lhs = bessel_i(nu - 1, z) - bessel_i(nu + 1, z)
    rhs = (2 * nu / z) * bessel_i(nu, z)
    assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-10


def test_real_input_stays_real():
    out = bessel_k(1, np.array([0.5, 1.0, 2.0]))
    assert out.dtype == np.float64
    assert isinstance(bessel_i(0, 2.0), float)


@pytest.mark.parametrize("z", [0.0, -1.0, -1 + 2j, 2j])
def test_left_half_plane_is_domain_error(z):
    with pytest.raises(DomainError):
        bessel_i(0, z)
    with pytest.raises(DomainError):
        bessel_k(0, z)


@pytest.mark.parametrize("nu", [-1, 0.3, 2.25])
def test_bad_order_is_domain_error(nu):
    with pytest.raises(DomainError):
        bessel_i(nu, 1.0)


def test_overflow_bound_is_range_error():
    with pytest.raises(RangeError):
        bessel_i(0, 800.0)


def test_small_argument_k_is_range_error():
    with pytest.raises(RangeError):
        bessel_k(0, 1e-12)
    assert np.isfinite(bessel_k(0, 1e-9))


def test_nan_is_rejected():
    with pytest.raises(DomainError):
        bessel_k(0, float("nan"))


# --- root finding ---------------------------------------------------------------


def test_root_nearest_seed():
    z = find_root_complex(lambda z: z * z + 1, 0.3 + 0.7j)
    assert abs(z - 1j) < 1e-12


def test_linear_root():
    assert abs(find_root_complex(lambda z: z - 1, 5.0) - 1) < 1e-12


def test_secular_root_matches_bisection():
    def f(k):
        return (2 * k - 1) ** 2 - cmath.exp(-0.2 * k)

    # 30-digit bisection of the same function on [0.5, 1.5]
    assert abs(find_root_complex(f, 1.0) - 0.954482691016614359352806755044) < 1e-12


def test_no_convergence_carries_diagnostics():
    with pytest.raises(NoConvergenceError) as info:
        find_root_complex(lambda z: cmath.exp(z), 0.0, maxiter=20)
    assert info.value.last is not None
    assert info.value.residual is not None


def test_muller_on_cubic():
    root, fval, _ = muller(lambda z: z**3 - 8, 1.0, 1.5, 2.5)
    assert abs(root - 2) < 1e-12 and abs(fval) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=4),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_polynomial_residual_within_tol(roots, seed):
    def f(z):
        out = 1.0 + 0j
        for r in roots:
            out *= z - r
        return out

    try:
        z = find_root_complex(f, seed, tol=1e-10)
    except NoConvergenceError:
        return  # multiple roots may defeat both methods; the error path is the contract
    assert abs(f(z)) <= 1e-10


# --- small eigenvalue problems ------------------------------------------------------


def test_diagonal_eigenvalues():
    vals = eigenvalues_small(np.diag([2.0, 3j]))
    np.testing.assert_allclose(vals, [3j, 2.0], atol=1e-12)


def test_symmetric_swap():
    np.testing.assert_allclose(eigenvalues_small([[0, 1], [1, 0]]), [-1, 1], atol=1e-12)


def test_companion_matrix():
    # z^3 - 6 z^2 + 11 z - 6 = (z - 1)(z - 2)(z - 3)
    C = np.array([[6, -11, 6], [1, 0, 0], [0, 1, 0]], dtype=float)
    np.testing.assert_allclose(eigenvalues_small(C), [1, 2, 3], atol=1e-10)


def test_characteristic_polynomial_of_companion():
    C = np.array([[6, -11, 6], [1, 0, 0], [0, 1, 0]], dtype=float)
    np.testing.assert_allclose(characteristic_polynomial(C), [1, -6, 11, -6], atol=1e-12)


def test_multiple_eigenvalue_and_scalar_matrix():
    np.testing.assert_allclose(eigenvalues_small(5 * np.eye(3)), [5, 5, 5])
    J = np.array([[2.0, 1e-9], [0.0, 2.0]])
    np.testing.assert_allclose(eigenvalues_small(J), [2, 2], atol=1e-8)


def test_eigenvalue_dimension_limit():
    with pytest.raises(ValueError):
        eigenvalues_small(np.eye(17))


def test_durand_kerner_cap():
    with pytest.raises(NoConvergenceError):
        durand_kerner([1, 0, 0, 0, -1], maxiter=1)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=10_000))
def test_similarity_invariance(k, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    P = np.eye(k) + 0.3 * (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k)))
    if np.linalg.cond(P) > 50:
        return
    a = eigenvalues_small(M)
    b = eigenvalues_small(np.linalg.solve(P, M @ P))
    # compare as multisets
    for v in a:
        assert np.min(np.abs(b - v)) < 1e-9


# --- smallest singular value -------------------------------------------------------


def test_identity_singular_value():
    assert smallest_singular(np.eye(4)).value == pytest.approx(1.0, rel=1e-12)


def test_diagonal_singular_value():
    assert smallest_singular(np.diag([3.0, 1e-5])).value == pytest.approx(1e-5, rel=1e-8)


def test_duplicated_row_is_flagged():
    rng = np.random.default_rng(7)
    M = rng.standard_normal((8, 8))
    M[5] = M[2]
    res = smallest_singular(M)
    assert res.value < 1e-12
    assert np.linalg.norm(M @ res.vector) < 1e-10


def test_exact_zero_pivot_flag():
    M = np.array([[0.0, 0.0], [0.0, 1.0]])
    res = smallest_singular(M)
    assert res.singular and res.value == 0.0
    assert np.linalg.norm(M @ res.vector) == 0.0


def test_singular_value_matches_svd():
    rng = np.random.default_rng(3)
    M = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    want = np.linalg.svd(M, compute_uv=False)[-1]
    assert smallest_singular(M).value == pytest.approx(want, rel=1e-8)


# --- fitting --------------------------------------------------------------------------

EPS = [1e-2, 5e-3, 2.5e-3, 1.25e-3]


def test_exact_affine_fit():
    fit = fit_expansion([(e, -1 + 2 * e) for e in EPS], 1)
    np.testing.assert_allclose(fit.coefficients, [-1, 2], atol=1e-12)
    assert fit.residual_norm <= 1e-12
    assert fit.order_estimate == float("inf")


def test_pure_quadratic_order():
    fit = fit_expansion([(e, 5 * e * e) for e in EPS], 1)
    assert 1.9 <= fit.order_estimate <= 2.1


def test_coefficient_count_and_call():
    fit = fit_expansion([(e, 1 + e + e**2) for e in EPS], 2)
    assert len(fit.coefficients) == 3
    assert fit(0.1) == pytest.approx(1.11)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(min_value=-10, max_value=10), min_size=3, max_size=3))
def test_exact_polynomial_recovered(coefs):
    pts = [(e, coefs[0] + coefs[1] * e + coefs[2] * e * e) for e in EPS + [6.25e-4]]
    fit = fit_expansion(pts, 2)
    scale = max(1.0, max(abs(c) for c in coefs))
    # conditioning of the eps-Vandermonde limits the quadratic term
    assert abs(fit.coefficients[0] - coefs[0]) <= 1e-10 * scale
    assert abs(fit.coefficients[1] - coefs[1]) <= 1e-10 * scale / EPS[-1]


def test_fit_rejects_repeats_and_short_input():
    with pytest.raises(ValueError):
        fit_expansion([(1e-2, 1), (1e-2, 2), (1e-3, 3), (1e-4, 4)], 1)
    with pytest.raises(ValueError):
        fit_expansion([(1e-2, 1), (1e-3, 2)], 1)
    with pytest.raises(ValueError):
        fit_expansion([(0.0, 1), (1e-3, 2), (1e-4, 3)], 1)


def test_extrapolate_is_interpolation():
    pts = [(e, 3 - e + 7 * e**3) for e in EPS]
    fit = extrapolate(pts)
    np.testing.assert_allclose(fit.coefficients, [3, -1, 0, 7], atol=1e-8)


def test_loglog_slope():
    x = np.array(EPS)
    assert loglog_slope(x, 4 * x**1.5) == pytest.approx(1.5)
