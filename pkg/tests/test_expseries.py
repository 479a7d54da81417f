import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from genfrac.errors import BudgetError, DomainError
from genfrac.expseries import (
    ExponentSumSeries,
    antiderivative,
    conv_power,
    convolve,
    differentiate,
    evaluate,
    laplace,
    linear_combine,
    power_kernel,
)
from genfrac.kernels import KernelSpec, build_associate, build_kernel


def h(beta):
    return power_kernel(beta)


def assert_single_term(s, exponent, coefficient, rtol=1e-14):
    assert len(s) == 1
    assert s.exponents[0] == pytest.approx(exponent, abs=1e-14)
    assert s.coefficients[0] == pytest.approx(coefficient, rel=rtol)


# random small series with exponents in (-1, 2]
series_st = st.lists(
    st.tuples(
        st.floats(min_value=-0.9, max_value=2.0),
        st.floats(min_value=-2.0, max_value=2.0).filter(lambda c: abs(c) > 1e-3),
    ),
    min_size=1,
    max_size=3,
).map(ExponentSumSeries.from_terms)


# {{{ normalization


def test_normalization_sorts_merges_and_drops_zeros():
    s = ExponentSumSeries((0.5, -0.5, 0.5 + 1e-14, 2.0, 1.0), (1.0, 2.0, 3.0, 0.0, -1.0))
    assert s.exponents == (-0.5, 0.5, 1.0)
    assert s.coefficients == (2.0, 4.0, -1.0)
    assert np.all(np.diff(s.exponents) > s.exponent_tol)


def test_near_integer_exponents_snap():
    s = ExponentSumSeries((1.0 - 1e-13,), (1.0,))
    assert s.exponents == (1.0,)


def test_truncation_keeps_lowest_exponents():
    s = ExponentSumSeries(tuple(range(10)), (1.0,) * 10, max_terms=4)
    assert s.exponents == (0.0, 1.0, 2.0, 3.0)
    assert s.truncated


def test_zero_series():
    z = ExponentSumSeries.zero()
    assert z.is_zero
    assert z.leading_exponent == math.inf
    assert evaluate(z, 2.0) == 0.0


def test_text_round_trip():
    s = convolve(h(0.3), linear_combine([(1.0, h(0.7)), (0.25, h(1.9))]))
    assert ExponentSumSeries.from_text(s.to_text()) == s


# }}}


# {{{ evaluate


def test_evaluate_examples():
    assert evaluate(h(1.0), 3.7) == 1.0
    assert evaluate(h(0.5), 1.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)


def test_evaluate_tempered_series():
    spec = KernelSpec("tempered", alpha=0.3, rho=2.0, terms=40)
    s = build_kernel(spec)
    assert s.truncated
    expected = 0.5**-0.7 * math.exp(-1.0) / math.gamma(0.3)
    res = evaluate(s, 0.5, full_output=True)
    assert res.value == pytest.approx(expected, rel=1e-13)
    assert not res.tail_dominant


def test_evaluate_flags_dominant_tail():
    s = build_kernel(KernelSpec("tempered", alpha=0.3, rho=2.0, terms=5))
    assert evaluate(s, 1.0, full_output=True).tail_dominant


def test_evaluate_domain():
    with pytest.raises(DomainError):
        evaluate(h(0.5), 0.0)


# }}}


# {{{ linear_combine


def test_linear_combine_examples():
    alpha, beta = 0.3, 0.4
    s = linear_combine([(1, h(0.6)), (1, h(0.9))])
    kappa = build_kernel(KernelSpec("ml", alpha=alpha, beta=beta))
    assert s.exponents == pytest.approx(kappa.exponents, abs=1e-15)
    assert s.coefficients == pytest.approx(kappa.coefficients, rel=1e-15)

    assert linear_combine([(1, h(0.6)), (-1, h(0.6))]).is_zero
    assert linear_combine([(2, h(1.0))]).terms == [(0.0, 2.0)]


def test_linear_combine_budget():
    a = ExponentSumSeries((0.0, 1.0), (1.0, 1.0), max_terms=3)
    b = ExponentSumSeries((2.0, 3.0), (1.0, 1.0), max_terms=3)
    with pytest.raises(BudgetError):
        linear_combine([(1, a), (1, b)])
    with pytest.raises(ValueError):
        linear_combine([])


# }}}


# {{{ convolve


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
def test_sonine_power_pair(alpha):
    assert_single_term(convolve(h(alpha), h(1 - alpha)), 0.0, 1.0)


def test_beta_rule():
    assert_single_term(convolve(h(0.3), h(0.9)), 0.2, 1 / math.gamma(1.2))


def test_tempered_semigroup():
    a = build_kernel(KernelSpec("tempered", alpha=0.4, rho=1.0, terms=40))
    b = build_kernel(KernelSpec("tempered", alpha=0.6, rho=1.0, terms=40))
    s = convolve(a, b)
    assert s.truncated
    for t in (0.1, 0.5, 1.0):
        assert evaluate(s, t) == pytest.approx(math.exp(-t), rel=1e-12)


def test_convolve_rejects_nonintegrable():
    bad = ExponentSumSeries((-1.5,), (1.0,))
    with pytest.raises(DomainError):
        convolve(bad, h(0.5))


@settings(max_examples=40, deadline=None)
@given(series_st, series_st)
def test_convolve_commutes(a, b):
    assert convolve(a, b).terms == convolve(b, a).terms


@settings(max_examples=30, deadline=None)
@given(series_st, series_st, series_st)
def test_convolve_associates(a, b, c):
    lhs = convolve(convolve(a, b), c)
    rhs = convolve(a, convolve(b, c))
    assert lhs.exponents == pytest.approx(rhs.exponents, abs=1e-12)
    assert lhs.coefficients == pytest.approx(rhs.coefficients, rel=1e-12, abs=1e-14)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@settings(max_examples=25, deadline=None)
@given(series_st, series_st, st.floats(min_value=0.1, max_value=2.0))
def test_convolve_matches_quadrature(a, b, t):
    def integrand(tau):
        return evaluate(a, t - tau) * evaluate(b, tau)

    # the endpoint singularities are split off into algebraic weights
    exact, _ = integrate.quad(integrand, 0.0, t, limit=200, epsabs=0, epsrel=1e-11)
    got = evaluate(convolve(a, b), t)
    scale = max(abs(exact), evaluate(convolve(_abs(a), _abs(b)), t))
    assert abs(got - exact) <= 1e-8 * scale


def _abs(s):
    return s.replace(coefficients=tuple(abs(c) for c in s.coefficients))


@settings(max_examples=40, deadline=None)
@given(series_st, series_st, st.floats(min_value=0.2, max_value=5.0))
def test_convolution_theorem(a, b, p):
    lhs = laplace(convolve(a, b), p)
    rhs = laplace(a, p) * laplace(b, p)
    scale = laplace(_abs(a), p) * laplace(_abs(b), p)
    assert abs(lhs - rhs) <= 1e-10 * scale


# }}}


# {{{ conv_power, differentiate, antiderivative


def test_conv_power_examples():
    assert_single_term(conv_power(h(0.4), 2), -0.2, 1 / math.gamma(0.8))
    assert_single_term(conv_power(h(1.0), 3), 2.0, 0.5)
    s = linear_combine([(1, h(0.4)), (2, h(1.3))])
    assert conv_power(s, 1) is s
    with pytest.raises(DomainError):
        conv_power(s, 0)


def test_differentiate_examples():
    assert differentiate(h(2.0), 1).terms == [(0.0, 1.0)]
    assert differentiate(h(1.0), 1).is_zero
    d = differentiate(h(1.8), 1)
    assert_single_term(d, -0.2, float(mpmath.rgamma(0.8)), rtol=1e-14)


def test_differentiate_may_leave_integrable_class():
    d = differentiate(h(0.5), 1)
    assert d.leading_exponent == -1.5
    assert not d.convolvable
    assert evaluate(d, 1.0) == pytest.approx(-0.5 / math.sqrt(math.pi))


def test_antiderivative_examples():
    assert antiderivative(h(1.0)).terms == [(1.0, 1.0)]
    assert_single_term(antiderivative(h(0.5)), 0.5, 1 / math.gamma(1.5))
    assert antiderivative(ExponentSumSeries.zero()).is_zero


@settings(max_examples=40, deadline=None)
@given(series_st)
def test_antiderivative_is_convolution_with_one(s):
    a = antiderivative(s)
    b = convolve(h(1.0), s)
    assert a.exponents == b.exponents
    assert a.coefficients == pytest.approx(b.coefficients, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(series_st)
def test_differentiate_inverts_antiderivative(s):
    d = differentiate(antiderivative(s), 1)
    # (e + 1) - 1 may differ from e in the last bit
    assert d.exponents == pytest.approx(s.exponents, abs=4e-16)
    assert d.coefficients == pytest.approx(s.coefficients, rel=1e-15)


# }}}


# {{{ laplace


def test_laplace_examples():
    for p in (0.5, 2.0, 7.0):
        assert laplace(h(0.5), p) == pytest.approx(p**-0.5, rel=1e-15)
    assert laplace(h(1.0), 2.0) == 0.5
    with pytest.raises(DomainError):
        laplace(h(1.0), 0.0)


@pytest.mark.parametrize("terms", [120, 200])
def test_laplace_ml_associate(terms):
    # the series converges like (p^-alpha)^m, so p = 2 needs ~105 terms for 1e-8
    alpha, beta, p = 0.25, 0.6, 2.0
    k = build_associate(KernelSpec("ml", alpha=alpha, beta=beta, terms=terms))
    expected = p ** (alpha - beta) / (p**alpha + 1)
    assert laplace(k, p) == pytest.approx(expected, abs=1e-8)


def test_laplace_ml_associate_at_40_terms_is_truncation_limited():
    alpha, beta, p = 0.25, 0.6, 2.0
    k = build_associate(KernelSpec("ml", alpha=alpha, beta=beta, terms=40))
    err = abs(laplace(k, p) - p ** (alpha - beta) / (p**alpha + 1))
    # first omitted term of the geometric tail
    assert 1e-5 < err < 1e-2


# }}}
