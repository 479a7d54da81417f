import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genfrac.errors import DomainError, PoleError
from genfrac.specfun import bessel, gamma, mittag_leffler, rgamma

mpmath.mp.dps = 40


def _ml_oracle(alpha, beta, z):
    return float(mpmath.nsum(lambda k: mpmath.mpf(z) ** k * mpmath.rgamma(alpha * k + beta), [0, mpmath.inf]))


# {{{ gamma


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.5, 10.0, 170.5, -0.5, -2.3])
def test_gamma_matches_mpmath(x):
    assert gamma(x) == pytest.approx(float(mpmath.gamma(x)), rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_gamma_poles(x):
    with pytest.raises(PoleError):
        gamma(x)
    assert rgamma(x) == 0.0


def test_gamma_overflow():
    with pytest.raises(OverflowError):
        gamma(200.0)
    assert rgamma(200.0) == pytest.approx(float(mpmath.rgamma(200)), rel=1e-12)


def test_gamma_examples():
    assert gamma(1) == 1.0
    assert gamma(5) == 24.0
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)


@settings(max_examples=100)
@given(st.floats(min_value=0.1, max_value=50.0))
def test_gamma_recurrence(x):
    assert gamma(x + 1) == pytest.approx(x * gamma(x), rel=1e-11)


# }}}


# {{{ Mittag-Leffler


def test_ml_e11_is_exp():
    zs = np.linspace(-5, 5, 101)
    rel = max(abs(mittag_leffler(1, 1, z) - math.exp(z)) / math.exp(z) for z in zs)
    assert rel <= 1e-10


def test_ml_e21_is_cosh():
    zs = np.linspace(0, 3, 61)
    rel = max(abs(mittag_leffler(2, 1, z * z) - math.cosh(z)) / math.cosh(z) for z in zs)
    assert rel <= 1e-10


def test_ml_e21_at_four():
    assert mittag_leffler(2, 1, 4.0) == pytest.approx(float(mpmath.cosh(2)), rel=1e-14)


def test_ml_e12_closed_form():
    z = 1.7
    assert mittag_leffler(1, 2, z) == pytest.approx((math.exp(z) - 1) / z, rel=1e-13)


@pytest.mark.parametrize("alpha,beta,z", [(0.25, 0.6, -1.0), (0.5, 1.0, -2.0), (0.8, 0.3, 3.0), (1.5, 1.2, -4.0)])
def test_ml_matches_mpmath(alpha, beta, z):
    assert mittag_leffler(alpha, beta, z) == pytest.approx(_ml_oracle(alpha, beta, z), rel=1e-11, abs=1e-13)


def test_ml_zero_argument():
    assert mittag_leffler(0.5, 0.7, 0.0) == pytest.approx(1 / math.gamma(0.7), rel=1e-15)
    assert mittag_leffler(0.5, 0.0, 0.0) == 0.0


def test_ml_full_output():
    res = mittag_leffler(1, 1, 2.0, full_output=True)
    assert res.value == pytest.approx(math.exp(2.0), rel=1e-14)
    assert 0 <= res.abs_error_estimate < 1e-12


def test_ml_domain():
    with pytest.raises(DomainError):
        mittag_leffler(0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        mittag_leffler(1.0, 1.0, 51.0)


# }}}


# {{{ Bessel


@pytest.mark.parametrize("nu", [0.0, 0.3, -0.4, 1.0, 2.5])
@pytest.mark.parametrize("x", [0.01, 0.5, 2.0, 7.5])
def test_bessel_first_matches_mpmath(nu, x):
    assert bessel("first", nu, x) == pytest.approx(float(mpmath.besselj(nu, x)), rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("x", [15.0, 20.0, 30.0])
def test_bessel_first_error_estimate_covers_cancellation(x):
    # the alternating series loses digits for large x; the estimate must say so
    res = bessel("first", 0.3, x, full_output=True)
    assert abs(res.value - float(mpmath.besselj(0.3, x))) <= res.abs_error_estimate


def test_bessel_half_integer_closed_form():
    expected = float(mpmath.sqrt(2 / (mpmath.pi * 2)) * mpmath.sin(2))
    assert bessel("first", 0.5, 2.0) == pytest.approx(expected, rel=1e-14)


@settings(max_examples=50)
@given(st.floats(min_value=-0.99, max_value=5.0), st.floats(min_value=0.0, max_value=30.0))
def test_modified_bessel_nonnegative(nu, x):
    assert bessel("modified", nu, x) >= 0


@pytest.mark.parametrize("nu", [0.0, 0.3, -0.4, 1.5])
@pytest.mark.parametrize("x", [0.01, 1.0, 10.0, 30.0])
def test_bessel_modified_matches_mpmath(nu, x):
    assert bessel("modified", nu, x) == pytest.approx(float(mpmath.besseli(nu, x)), rel=1e-13)


def test_bessel_at_zero():
    assert bessel("first", 0.0, 0.0) == 1.0
    assert bessel("modified", 0.5, 0.0) == 0.0
    assert math.isinf(bessel("first", -0.5, 0.0))


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel("second", 0.0, 1.0)
    with pytest.raises(DomainError):
        bessel("first", -1.0, 1.0)
    with pytest.raises(DomainError):
        bessel("first", 0.0, -1.0)


@settings(max_examples=50)
@given(st.floats(min_value=0.0, max_value=3.0), st.floats(min_value=0.1, max_value=10.0))
def test_bessel_recurrence(nu, x):
    # J_{nu-1} + J_{nu+1} = 2 nu / x J_nu  (nu shifted to keep all orders > -1)
    nu = nu + 0.5
    lhs = bessel("modified", nu - 1, x) - bessel("modified", nu + 1, x)
    rhs = 2 * nu / x * bessel("modified", nu, x)
    assert lhs == pytest.approx(rhs, rel=1e-11)


# }}}
