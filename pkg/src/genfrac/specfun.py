"""Scalar special functions used by the kernel catalog.

Only real arguments are supported.  The series evaluators share one stopping
rule: summation ends once a term falls below ``1e-16 * (|partial sum| + 1)``,
with a hard cap of :data:`MAX_TERMS` terms.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from genfrac.errors import ConvergenceError, DomainError, PoleError

__all__ = [
    "MAX_TERMS",
    "ML_Z_MAX",
    "SpecialValue",
    "bessel",
    "gamma",
    "mittag_leffler",
    "rgamma",
]

MAX_TERMS = 10_000
SERIES_RTOL = 1e-16
EPS = 2.0**-52
ML_Z_MAX = 50.0


class SpecialValue(NamedTuple):
    value: float
    abs_error_estimate: float


def gamma(x: float) -> float:
    """Gamma function for real ``x``.

    Raises :class:`PoleError` at nonpositive integers and :class:`OverflowError`
    when the result is not representable as a float.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma requires a finite argument, got {x!r}")
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at x = {x:g}")
    try:
        return math.gamma(x)
    except OverflowError:
        raise OverflowError(f"|gamma({x:g})| exceeds the float range") from None


def rgamma(x: float) -> float:
    """Reciprocal Gamma function, extended by zero at the poles."""
    if x <= 0 and x == math.floor(x):
        return 0.0
    if x > 171.0:
        # 1/gamma underflows long before lgamma overflows
        return math.exp(-math.lgamma(x))
    return 1.0 / math.gamma(x)


class _Neumaier:
    """Running compensated sum."""

    __slots__ = ("s", "c", "abs_sum", "err_sum")

    def __init__(self) -> None:
        self.s = 0.0
        self.c = 0.0
        self.abs_sum = 0.0
        self.err_sum = 0.0

    def add(self, x: float, err: float = 0.0) -> None:
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t
        self.abs_sum += abs(x)
        self.err_sum += err

    @property
    def value(self) -> float:
        return self.s + self.c


def _sum_series(term, k_min: int, what: str) -> SpecialValue:
    """Sum ``term(k)`` for ``k = 0, 1, ...`` under the shared stopping rule.

    ``term`` returns the term and a bound on its own rounding error.  The rule
    is not checked before ``k_min`` so that terms vanishing at Gamma poles (or
    before the terms start to decay) do not end the sum early.
    """
    acc = _Neumaier()
    for k in range(MAX_TERMS):
        t, t_err = term(k)
        acc.add(t, t_err)
        if k >= k_min and abs(t) < SERIES_RTOL * (abs(acc.value) + 1.0):
            # cancellation makes the error scale with the summed magnitudes
            err = abs(t) + acc.err_sum + 2.0 * EPS * acc.abs_sum
            return SpecialValue(acc.value, err)
    raise ConvergenceError(f"{what}: no convergence within {MAX_TERMS} terms")


def _exp_term(sign: float, a: float, b: float) -> tuple[float, float]:
    """``sign * exp(a - b)`` with an error bound; exp turns the absolute
    rounding error of the exponent into a relative error of the term."""
    v = sign * math.exp(a - b)
    return v, abs(v) * EPS * (abs(a) + abs(b) + 2.0)


def mittag_leffler(
    alpha: float, beta: float, z: float, *, z_max: float = ML_Z_MAX, full_output: bool = False
) -> float | SpecialValue:
    r"""Two-parameter Mittag-Leffler function :math:`E_{\alpha,\beta}(z)`.

    Direct summation of :math:`\sum_k z^k / \Gamma(\alpha k + \beta)`, valid for
    :math:`|z| \le z_{max}`.
    """
    if not alpha > 0:
        raise DomainError(f"mittag_leffler requires alpha > 0, got {alpha!r}")
    if not abs(z) <= z_max:
        raise DomainError(f"|z| = {abs(z):g} exceeds the direct-summation bound {z_max:g}")

    # past this index the arguments of Gamma exceed its minimum and terms decay
    k_min = max(1, math.ceil((2.0 - beta) / alpha))
    if z == 0.0:
        res = SpecialValue(rgamma(beta), 0.0)
    else:
        log_abs_z = math.log(abs(z))
        sign = -1.0 if z < 0 else 1.0

        def term(k: int) -> float:
            x = alpha * k + beta
            if x <= 0 and x == math.floor(x):
                return 0.0
            lg = math.lgamma(x)
            gsign = math.copysign(1.0, math.gamma(x)) if x < 0 else 1.0
            return _exp_term((sign**k) * gsign, k * log_abs_z, lg)

        res = _sum_series(term, k_min, "mittag_leffler")
    return res if full_output else res.value


def bessel(kind: str, nu: float, x: float, *, full_output: bool = False) -> float | SpecialValue:
    r"""Bessel function :math:`J_\nu(x)` (``kind="first"``) or modified Bessel
    function :math:`I_\nu(x)` (``kind="modified"``) from the ascending series.

    Intended for ``0 <= x <= 30``.  For ``-1 < nu < 0`` the value at ``x = 0``
    is infinite.
    """
    if kind not in ("first", "modified"):
        raise DomainError(f"unknown Bessel kind {kind!r}; expected 'first' or 'modified'")
    if not nu > -1:
        raise DomainError(f"bessel requires nu > -1, got {nu!r}")
    if not x >= 0:
        raise DomainError(f"bessel requires x >= 0, got {x!r}")

    if x == 0.0:
        if nu == 0:
            value = 1.0
        elif nu > 0:
            value = 0.0
        else:
            value = math.inf
        res = SpecialValue(value, 0.0)
        return res if full_output else res.value

    sign = -1.0 if kind == "first" else 1.0
    log_half_x = math.log(x / 2.0)

    def term(k: int) -> float:
        return _exp_term(
            sign**k, (2 * k + nu) * log_half_x, math.lgamma(k + 1) + math.lgamma(k + nu + 1)
        )

    res = _sum_series(term, max(1, math.ceil(x / 2.0)), "bessel")
    return res if full_output else res.value
