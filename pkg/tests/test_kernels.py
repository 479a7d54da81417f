import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genfrac.errors import DegenerateError, DomainError, SpecError, UnsupportedError
from genfrac.expseries import convolve, evaluate, power_kernel
from genfrac.kernels import (
    FAMILIES,
    IllConditionedWarning,
    KernelSpec,
    SoninePair,
    associate_kernel,
    associate_on_lattice,
    build_associate,
    build_kernel,
    closed_form_laplace,
    laplace_product_check,
    make_pair,
    pair_laplace_check,
    sonine_residual,
)
from genfrac.specfun import bessel


def exp_t2_coeffs(N):
    # exp(t^2) = sum t^(2m)/m!
    a = np.zeros(N)
    a[::2] = [1 / math.factorial(m) for m in range(len(a[::2]))]
    return a


# {{{ KernelSpec


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(family="power", alpha=1.0),
        dict(family="power"),
        dict(family="tempered", alpha=0.5, rho=-1.0),
        dict(family="bessel", alpha=0.0),
        dict(family="ml", alpha=0.6, beta=0.4),
        dict(family="multiterm", weights=(1.0,), orders=(0.3, 0.5)),
        dict(family="multiterm", weights=(1.0, 0.0), orders=(0.3, 0.5)),
        dict(family="multiterm", weights=(1.0,), orders=(1.2,)),
        dict(family="series", alpha=0.5, coeffs=(0.0, 1.0)),
        dict(family="gauss", alpha=0.5),
        dict(family="power", alpha=0.5, terms=0),
        dict(family="power", alpha=math.nan),
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(SpecError):
        KernelSpec(**kwargs)


@pytest.mark.parametrize(
    "spec",
    [
        KernelSpec("power", alpha=0.1 + 0.2),
        KernelSpec("tempered", alpha=0.5, rho=1 / 3, terms=17),
        KernelSpec("ml", alpha=0.25, beta=0.6),
        KernelSpec("multiterm", weights=(1.0, 0.5), orders=(0.3, 2 / 3)),
        KernelSpec("series", alpha=0.7, coeffs=(1.0, math.pi, -1e-300)),
    ],
)
def test_spec_text_round_trip_is_bit_exact(spec):
    assert KernelSpec.from_text(spec.to_text()) == spec


def test_spec_text_errors():
    with pytest.raises(SpecError):
        KernelSpec.from_text("alpha=0.5\n")
    with pytest.raises(SpecError):
        KernelSpec.from_text("family=power\nalpha=0.5\ncolour=red\n")


# }}}


# {{{ build_kernel


def test_power_kernel():
    s = build_kernel(KernelSpec("power", alpha=0.5))
    assert s.terms == [(-0.5, 1 / math.gamma(0.5))]


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("t", [0.25, 1.0])
def test_bessel_kernels_match_bessel_functions(alpha, t):
    kappa = build_kernel(KernelSpec("bessel", alpha=alpha))
    k = build_associate(KernelSpec("bessel", alpha=alpha))
    r = math.sqrt(t)
    assert evaluate(kappa, t) == pytest.approx(r ** (alpha - 1) * bessel("first", alpha - 1, 2 * r), rel=1e-12)
    assert evaluate(k, t) == pytest.approx(r**-alpha * bessel("modified", -alpha, 2 * r), rel=1e-12)


def test_multiterm_kernel():
    s = build_kernel(KernelSpec("multiterm", weights=(1, 1), orders=(0.3, 0.6)))
    assert s.exponents == pytest.approx((-0.6, -0.3), abs=1e-15)
    assert s.coefficients == pytest.approx((1 / math.gamma(0.4), 1 / math.gamma(0.7)), rel=1e-15)


def test_tempered_kernels_match_closed_forms():
    alpha, rho, t = 0.4, 1.5, 0.7
    kappa = build_kernel(KernelSpec("tempered", alpha=alpha, rho=rho))
    k = build_associate(KernelSpec("tempered", alpha=alpha, rho=rho))
    h = lambda a: t ** (a - 1) * math.exp(-rho * t) / math.gamma(a)
    assert evaluate(kappa, t) == pytest.approx(h(alpha), rel=1e-13)
    # int_0^t h_{1-alpha}(s) e^{-rho s} ds as a lower incomplete Gamma function
    integral = float(mpmath.gammainc(1 - alpha, 0, rho * t) / (rho ** (1 - alpha) * mpmath.gamma(1 - alpha)))
    assert evaluate(k, t) == pytest.approx(h(1 - alpha) + rho * integral, rel=1e-12)


def test_ml_associate_matches_mittag_leffler():
    alpha, beta, t = 0.25, 0.6, 0.8
    k = build_associate(KernelSpec("ml", alpha=alpha, beta=beta, terms=120))
    expected = float(
        mpmath.mpf(t) ** (beta - 1)
        * mpmath.nsum(lambda m: (-mpmath.mpf(t) ** alpha) ** m * mpmath.rgamma(alpha * m + beta), [0, mpmath.inf])
    )
    assert evaluate(k, t) == pytest.approx(expected, rel=1e-12)


# }}}


# {{{ associate_kernel


def test_associate_of_pure_power_is_pure_power():
    assert np.array_equal(associate_kernel(0.4, [1.0, 0.0, 0.0], 5), [1.0, 0, 0, 0, 0])


def test_associate_hand_example():
    assert associate_kernel(0.5, [1, 1], 2) == pytest.approx([1.0, -1.0], abs=1e-12)


def test_associate_degenerate():
    with pytest.raises(DegenerateError):
        associate_kernel(0.5, [0.0, 1.0], 3)
    with pytest.raises(DomainError):
        associate_kernel(1.5, [1.0], 3)


@settings(max_examples=20, deadline=None)
@given(
    st.floats(min_value=0.05, max_value=0.95),
    st.lists(st.floats(min_value=-1, max_value=1), min_size=12, max_size=12).filter(lambda a: abs(a[0]) > 0.1),
)
def test_associate_of_associate_is_identity(alpha, a):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        b = associate_kernel(alpha, a, 12)
        back = associate_kernel(1 - alpha, b, 12)
    assert back == pytest.approx(a, rel=1e-10, abs=1e-10 * max(abs(x) for x in a))


@settings(max_examples=20, deadline=None)
@given(
    st.floats(min_value=0.05, max_value=0.95),
    st.lists(st.floats(min_value=-1, max_value=1), min_size=12, max_size=12).filter(lambda a: abs(a[0]) > 0.1),
)
def test_constructed_pair_convolves_to_one(alpha, a):
    spec = KernelSpec("series", alpha=alpha, coeffs=tuple(a), terms=12)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        prod = convolve(build_kernel(spec), build_associate(spec))
    coef = dict(prod.terms)
    assert coef[0.0] == pytest.approx(1.0, abs=1e-10)
    for n in range(1, 11):
        assert abs(coef.get(float(n), 0.0)) <= 1e-10


def test_exp_t2_associate():
    # low-order coefficients are exact; the residual on (0, 1] is set by truncation
    alpha = 0.3
    spec10 = KernelSpec("series", alpha=alpha, coeffs=tuple(exp_t2_coeffs(10)), terms=10)
    prod = convolve(build_kernel(spec10), build_associate(spec10))
    coef = dict(prod.terms)
    assert coef[0.0] == pytest.approx(1.0, abs=1e-14)
    assert all(abs(coef.get(float(n), 0.0)) <= 1e-14 for n in range(1, 10))
    assert sonine_residual(build_kernel(spec10), build_associate(spec10)) < 1e-4

    spec30 = KernelSpec("series", alpha=alpha, coeffs=tuple(exp_t2_coeffs(30)), terms=30)
    assert make_pair(spec30).residual_bound <= 1e-9


def test_growth_warning():
    with pytest.warns(IllConditionedWarning):
        associate_kernel(0.5, [1e-6, 1.0], 4)


def test_lattice_solver_reduces_to_triangular_system():
    alpha, a = 0.35, [1.0, 0.4, -0.3, 0.2]
    b = associate_kernel(alpha, a, 6)
    c = [x / math.gamma(alpha) for x in a]
    f0, d = associate_on_lattice(alpha - 1, 1.0, c, 6)
    assert f0 == pytest.approx(-alpha)
    assert d == pytest.approx(b / math.gamma(1 - alpha), rel=1e-12)


def test_incommensurable_multiterm():
    with pytest.raises(UnsupportedError):
        make_pair(KernelSpec("multiterm", weights=(1, 1), orders=(0.3, 1 / math.pi)))


# }}}


# {{{ pairs and residuals


def test_power_pair():
    pair = make_pair(KernelSpec("power", alpha=0.5))
    assert pair.kappa == pair.k
    assert pair.residual_bound <= 1e-15


def test_sonine_residual_examples():
    assert sonine_residual(power_kernel(0.3), power_kernel(0.7)) <= 1e-14
    r = sonine_residual(power_kernel(0.3), power_kernel(0.6))
    ts = np.geomspace(1e-6, 1, 64)
    assert r == pytest.approx(max(abs(t**-0.1 / math.gamma(0.9) - 1) for t in ts), rel=1e-12)
    assert r > 0.1
    bessel_spec = KernelSpec("bessel", alpha=0.5, terms=30)
    assert sonine_residual(build_kernel(bessel_spec), build_associate(bessel_spec)) <= 1e-8


@pytest.mark.parametrize(
    "spec,bound",
    [
        (KernelSpec("ml", alpha=0.25, beta=0.6), 1e-8),
        (KernelSpec("tempered", alpha=0.5, rho=1.0, terms=40), 1e-8),
        (KernelSpec("multiterm", weights=(1, 1), orders=(0.3, 0.6)), 1e-8),
    ],
)
def test_pair_residual_examples(spec, bound):
    assert make_pair(spec).residual_bound <= bound


family_specs = st.one_of(
    st.builds(lambda a: KernelSpec("power", alpha=a), st.floats(0.05, 0.95)),
    st.builds(lambda a, r: KernelSpec("tempered", alpha=a, rho=r), st.floats(0.05, 0.95), st.floats(0.0, 3.0)),
    st.builds(lambda a: KernelSpec("bessel", alpha=a), st.floats(0.05, 0.95)),
    st.builds(
        lambda a, d: KernelSpec("ml", alpha=a, beta=a + d * (1 - a)),
        st.floats(0.2, 0.9),
        st.floats(0.05, 0.95),
    ),
    # 60 terms suffice for a lattice step of 1/4 and a weight ratio <= 1, i.e. the
    # largest order carries the largest weight (see the README calibration)
    st.builds(
        lambda w, o: KernelSpec("multiterm", weights=(w, 1.0)[-len(o):], orders=o),
        st.floats(0.1, 1.0),
        st.sets(st.sampled_from((0.25, 0.5, 0.75)), min_size=1, max_size=2).map(lambda o: tuple(sorted(o))),
    ),
    st.builds(
        lambda a, c: KernelSpec("series", alpha=a, coeffs=(1.0, *c)),
        st.floats(0.05, 0.95),
        st.lists(st.floats(-0.5, 0.5), min_size=0, max_size=3),
    ),
)


@settings(max_examples=20, deadline=None)
@given(family_specs)
def test_catalog_pairs_satisfy_sonine_condition(spec):
    pair = make_pair(spec)
    assert pair.residual_bound <= 1e-6
    for s in (pair.kappa, pair.k):
        assert -1 < s.leading_exponent < 0


def test_pair_rejects_non_sonine_members():
    with pytest.raises(DomainError):
        SoninePair(power_kernel(1.5), power_kernel(0.5), 0.0)


# }}}


# {{{ Laplace checks


def test_laplace_power_pair():
    pair = make_pair(KernelSpec("power", alpha=0.37))
    assert pair_laplace_check(pair, [0.1, 0.5, 1, 2, 5, 50]) <= 1e-12


def test_laplace_ml_pair():
    pair = make_pair(KernelSpec("ml", alpha=0.25, beta=0.6))
    assert pair_laplace_check(pair, [0.5, 1, 2, 5]) <= 1e-8


def test_laplace_tempered_pair():
    pair = make_pair(KernelSpec("tempered", alpha=0.5, rho=1.0, terms=40))
    assert pair_laplace_check(pair, [1, 2, 4]) <= 1e-8


def test_closed_forms_agree_with_series_where_both_converge():
    for spec, p in [
        (KernelSpec("ml", alpha=0.25, beta=0.6, terms=200), 5.0),
        (KernelSpec("tempered", alpha=0.4, rho=1.0), 4.0),
        (KernelSpec("bessel", alpha=0.4), 2.0),
    ]:
        lk, lkk = closed_form_laplace(spec)
        pair = make_pair(spec)
        assert laplace_product_check(pair.kappa, lkk, [p]) <= 1e-9
        assert laplace_product_check(lk, pair.k, [p]) <= 1e-9


def test_laplace_check_domain():
    with pytest.raises(DomainError):
        laplace_product_check(power_kernel(0.5), power_kernel(0.5), [0.0])
    with pytest.raises(DomainError):
        laplace_product_check(power_kernel(0.5), power_kernel(0.5), [])


def test_every_family_is_covered():
    assert set(FAMILIES) == {"power", "tempered", "bessel", "ml", "multiterm", "series"}


# }}}
