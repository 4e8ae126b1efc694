import math

import mpmath as mp
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import integrate

from hcnsec.errors import ConvergenceError, DomainError
from hcnsec.specfun import (
    SERIES_TERM_CAP,
    _hyp2f1_series,
    c_alpha_m,
    gamma,
    gauss_2f1,
    gauss_2f1_detail,
    lambert_w0,
    lambert_w0_detail,
    log_gamma,
    omega,
    omega_tail_scaled,
    regularized_gamma_p,
    regularized_gamma_q,
)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# --- 2F1 -------------------------------------------------------------------

def test_2f1_at_zero_is_one():
    assert gauss_2f1(3, 2, 5, 0.0) == 1.0


def test_2f1_log_identity():
    assert gauss_2f1(1, 1, 2, -1.0) == pytest.approx(math.log(2.0), rel=1e-12)


def test_2f1_arctan_identity():
    assert gauss_2f1(0.5, 1, 1.5, -1.0) == pytest.approx(math.pi / 4, rel=1e-12)


@pytest.mark.parametrize("z", [-0.3, -2.0, -17.5])
def test_2f1_log_identity_off_unit(z):
    assert rel(gauss_2f1(1, 1, 2, z), math.log1p(-z) / -z) < 1e-12


@pytest.mark.parametrize("z", [-400.0, -1e5])
def test_2f1_logarithmic_case_fails_loudly(z):
    # integer b - a at large |z| is the logarithmic case: no silent wrong value
    with pytest.raises(ConvergenceError):
        gauss_2f1(1, 1, 2, z)


def test_2f1_rejects_bad_parameters():
    with pytest.raises(DomainError):
        gauss_2f1(1, 2, 2, -1.0)        # c - b = 0
    with pytest.raises(DomainError):
        gauss_2f1(1, 1, 2, 0.5)         # z > 0 unsupported
    with pytest.raises(DomainError):
        gauss_2f1(-1, 1, 2, -0.5)


def test_2f1_reports_exhausted_series():
    res = _hyp2f1_series(1.0, 1.0, 2.0, -0.999999999, tol=0.0)
    assert not res.converged and res.terms_used == SERIES_TERM_CAP


@given(a=st.floats(0.1, 25), b=st.floats(0.1, 25), dc=st.floats(0.05, 10),
       logz=st.floats(-3, 7))
def test_2f1_matches_mpmath(a, b, dc, logz):
    c = b + dc
    z = -(10.0**logz)
    assume(abs((b - a) - round(b - a)) > 1e-2)
    try:
        got = gauss_2f1(a, b, c, z)
    except ConvergenceError:
        pytest.skip("explicit non-convergence is allowed")
    want = float(mp.hyp2f1(a, b, c, z))
    assert rel(got, want) < 1e-9


@given(a=st.floats(0.1, 8), b=st.floats(0.1, 8), dc=st.floats(0.1, 5), z=st.floats(-0.5, -1e-6))
def test_2f1_direct_series_agrees_with_transformed(a, b, dc, z):
    c = b + dc
    direct = _hyp2f1_series(a, b, c, z)
    assert direct.converged
    assert rel(gauss_2f1(a, b, c, z), direct.value) < 1e-9


def test_2f1_model_parameter_family():
    # the shapes that occur in the interference exponent and Toeplitz entries
    for p in range(1, 8):
        for d in (0.5, 2 / 3, 0.8):
            for z in (-0.01, -1.3, -25.0, -3e3):
                assert rel(gauss_2f1(p, p + d, p + d + 1, z), float(mp.hyp2f1(p, p + d, p + d + 1, z))) < 1e-10
                assert rel(gauss_2f1(p + 1, p - d, p - d + 1, z),
                           float(mp.hyp2f1(p + 1, p - d, p - d + 1, z))) < 1e-10


def test_2f1_detail_counts_terms():
    res = gauss_2f1_detail(2, 0.5, 1.5, -3.0)
    assert res.converged and 0 < res.terms_used < 200


# --- Lambert W -------------------------------------------------------------

def test_lambert_special_values():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(math.e) == pytest.approx(1.0, rel=1e-14)


def test_lambert_at_one_against_newton_oracle():
    w = 0.5
    for _ in range(50):
        w -= (w * math.exp(w) - 1.0) / (math.exp(w) * (w + 1.0))
    assert lambert_w0(1.0) == pytest.approx(w, abs=1e-13)
    assert lambert_w0(1.0) == pytest.approx(0.5671432904, abs=1e-10)


@given(st.floats(0.0, 1e6))
def test_lambert_round_trip(x):
    w = lambert_w0(x)
    assert abs(w * math.exp(w) - x) <= 1e-12 * max(1.0, x)


def test_lambert_negative_is_domain_error():
    with pytest.raises(DomainError):
        lambert_w0(-0.1)


def test_lambert_detail_converges_quickly():
    res = lambert_w0_detail(123.4)
    assert res.converged and res.terms_used < 20


# --- Omega / incomplete gamma ----------------------------------------------

def test_omega_values():
    assert omega(0.0) == 0.0
    assert omega(10.0) == pytest.approx(1.0, abs=1e-12)
    assert omega(1.0) == pytest.approx(0.8427008, abs=1e-7)


@pytest.mark.parametrize("x", [0.1 * i for i in range(1, 51)])
def test_omega_matches_quadrature(x):
    # substitute t = s^2 to remove the endpoint singularity
    val, _ = integrate.quad(lambda s: 2.0 * math.exp(-s * s), 0.0, x, epsabs=1e-14, epsrel=1e-13, limit=200)
    assert omega(x) == pytest.approx(val / math.sqrt(math.pi), abs=1e-10)


@given(st.floats(0, 8), st.floats(0, 8))
def test_omega_monotone_bounded(x, y):
    lo, hi = sorted((x, y))
    assert 0.0 <= omega(lo) <= omega(hi) <= 1.0


@pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 1.3, 2.5, 6.0, 30.0, 1e3])
def test_omega_tail_scaled(x):
    want = float(mp.exp(mp.mpf(x) ** 2) * mp.erfc(x))
    assert rel(omega_tail_scaled(x), want) < 1e-11


def test_regularized_gamma_examples():
    assert regularized_gamma_p(1, 0.0) == 0.0
    assert regularized_gamma_p(1, math.log(2.0)) == pytest.approx(0.5, abs=1e-14)
    assert regularized_gamma_p(3, 2.674) == pytest.approx(0.5, abs=1e-3)


@given(st.floats(0.1, 60), st.floats(0, 200))
def test_regularized_gamma_matches_mpmath(a, x):
    p = regularized_gamma_p(a, x)
    assert abs(p - float(mp.gammainc(a, 0, x, regularized=True))) < 1e-12
    assert abs(p + regularized_gamma_q(a, x) - 1.0) < 1e-13


@given(st.floats(0.5, 30), st.floats(0, 50), st.floats(0, 50))
def test_regularized_gamma_monotone(a, x, y):
    lo, hi = sorted((x, y))
    assert 0.0 <= regularized_gamma_p(a, lo) <= regularized_gamma_p(a, hi) <= 1.0


# --- Gamma and C_{alpha,m} --------------------------------------------------

@given(st.floats(0.05, 170))
def test_gamma_matches_math(x):
    assert rel(gamma(x), math.gamma(x)) < 1e-12
    assert abs(log_gamma(x) - math.lgamma(x)) < 1e-11 * max(1.0, abs(math.lgamma(x)))


def test_gamma_poles():
    for x in (0.0, -1.0, -7.0):
        with pytest.raises(DomainError):
            gamma(x)


def test_c_alpha_m_values():
    assert c_alpha_m(4, 2) == pytest.approx(math.pi / 2, rel=1e-13)
    assert c_alpha_m(4, 3) == pytest.approx(3 * math.pi / 4, rel=1e-13)
    want = mp.gamma(mp.mpf(3) + mp.mpf(2) / 3) * mp.gamma(1 - mp.mpf(2) / 3) / mp.gamma(3)
    assert rel(c_alpha_m(3, 4), float(want)) < 1e-12


@given(st.floats(2.05, 8), st.integers(2, 200))
def test_c_alpha_m_recurrence(alpha, m):
    ratio = c_alpha_m(alpha, m + 1) / c_alpha_m(alpha, m)
    assert rel(ratio, (m - 1 + 2 / alpha) / (m - 1)) < 1e-12


def test_c_alpha_m_domain():
    with pytest.raises(DomainError):
        c_alpha_m(2.0, 3)
    with pytest.raises(DomainError):
        c_alpha_m(4.0, 1)
