r"""Exact arithmetic on finite exponent sums :math:`\sum_i c_i t^{e_i}`.

Every catalog kernel, its convolution powers and the closed-form operator
results live in this representation.  The key identity is the Beta-function
rule for the Laplace convolution of two powers,

.. math::

    t^{a} * t^{b} = B(a + 1, b + 1)\, t^{a + b + 1}, \qquad a, b > -1,

which makes the set of such sums closed under convolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import special

from genfrac.errors import BudgetError, DomainError
from genfrac.specfun import gamma, rgamma

__all__ = [
    "DEFAULT_EXPONENT_TOL",
    "DEFAULT_MAX_TERMS",
    "EvalResult",
    "ExponentSumSeries",
    "antiderivative",
    "conv_power",
    "convolve",
    "differentiate",
    "evaluate",
    "laplace",
    "linear_combine",
    "power_kernel",
]

DEFAULT_MAX_TERMS = 256
DEFAULT_EXPONENT_TOL = 1e-12
TAIL_RTOL = 1e-8


class EvalResult(NamedTuple):
    value: float
    tail_dominant: bool


@dataclass(frozen=True)
class ExponentSumSeries:
    """Normalized finite sum of real powers of ``t``.

    Construction sorts the terms, merges exponents closer than
    ``exponent_tol``, snaps near-integer exponents onto the integer, drops zero
    coefficients and keeps at most ``max_terms`` terms (the lowest exponents),
    setting :attr:`truncated` when anything was cut.
    """

    exponents: tuple[float, ...] = ()
    coefficients: tuple[float, ...] = ()
    max_terms: int = DEFAULT_MAX_TERMS
    exponent_tol: float = DEFAULT_EXPONENT_TOL
    truncated: bool = False
    _normalized: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self._normalized:
            return
        if len(self.exponents) != len(self.coefficients):
            raise ValueError("exponents and coefficients must have the same length")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be positive, got {self.max_terms}")
        if not self.exponent_tol > 0:
            raise ValueError(f"exponent_tol must be positive, got {self.exponent_tol}")
        exps, coeffs = _normalize(
            np.asarray(self.exponents, dtype=float),
            np.asarray(self.coefficients, dtype=float),
            self.exponent_tol,
        )
        truncated = self.truncated
        if exps.size > self.max_terms:
            exps, coeffs = exps[: self.max_terms], coeffs[: self.max_terms]
            truncated = True
        object.__setattr__(self, "exponents", tuple(float(e) for e in exps))
        object.__setattr__(self, "coefficients", tuple(float(c) for c in coeffs))
        object.__setattr__(self, "truncated", truncated)
        object.__setattr__(self, "_normalized", True)

    # {{{ constructors

    @classmethod
    def from_terms(
        cls,
        terms: Iterable[tuple[float, float]],
        *,
        max_terms: int = DEFAULT_MAX_TERMS,
        exponent_tol: float = DEFAULT_EXPONENT_TOL,
    ) -> ExponentSumSeries:
        """Build from ``(exponent, coefficient)`` pairs."""
        terms = list(terms)
        return cls(
            tuple(e for e, _ in terms),
            tuple(c for _, c in terms),
            max_terms=max_terms,
            exponent_tol=exponent_tol,
        )

    @classmethod
    def zero(cls, *, max_terms: int = DEFAULT_MAX_TERMS) -> ExponentSumSeries:
        return cls((), (), max_terms=max_terms)

    @classmethod
    def constant(cls, c: float = 1.0, *, max_terms: int = DEFAULT_MAX_TERMS) -> ExponentSumSeries:
        return cls((0.0,), (float(c),), max_terms=max_terms)

    # }}}

    def __len__(self) -> int:
        return len(self.exponents)

    @property
    def terms(self) -> list[tuple[float, float]]:
        return list(zip(self.exponents, self.coefficients))

    @property
    def is_zero(self) -> bool:
        return not self.exponents

    @property
    def leading_exponent(self) -> float:
        """Smallest exponent; ``inf`` for the zero series."""
        return self.exponents[0] if self.exponents else math.inf

    @property
    def convolvable(self) -> bool:
        """True when every exponent exceeds -1, i.e. the sum is integrable at 0."""
        return self.leading_exponent > -1.0

    def replace(self, **kwargs) -> ExponentSumSeries:
        fields = {
            "exponents": self.exponents,
            "coefficients": self.coefficients,
            "max_terms": self.max_terms,
            "exponent_tol": self.exponent_tol,
            "truncated": self.truncated,
        }
        fields.update(kwargs)
        return ExponentSumSeries(**fields)

    def scale(self, w: float) -> ExponentSumSeries:
        return linear_combine([(w, self)])

    def __call__(self, t):
        """Evaluate at a scalar or an array of positive ``t``."""
        if np.ndim(t) == 0:
            return evaluate(self, float(t))
        ts = np.asarray(t, dtype=float)
        return np.array([evaluate(self, float(x)) for x in ts.ravel()]).reshape(ts.shape)

    # {{{ text serialization

    def to_text(self) -> str:
        """Two-column ``exponent coefficient`` block, one term per line."""
        return "".join(f"{e:.17g} {c:.17g}\n" for e, c in self.terms)

    @classmethod
    def from_text(cls, text: str, *, max_terms: int = DEFAULT_MAX_TERMS) -> ExponentSumSeries:
        terms = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'exponent coefficient', got {line!r}")
            terms.append((float(parts[0]), float(parts[1])))
        return cls.from_terms(terms, max_terms=max(max_terms, len(terms)))

    # }}}


def _normalize(
    exps: np.ndarray, coeffs: np.ndarray, tol: float
) -> tuple[np.ndarray, np.ndarray]:
    if exps.size == 0:
        return exps, coeffs
    if not (np.all(np.isfinite(exps)) and np.all(np.isfinite(coeffs))):
        raise DomainError("series terms must be finite")

    rounded = np.round(exps)
    exps = np.where(np.abs(exps - rounded) <= tol, rounded, exps)

    order = np.argsort(exps, kind="stable")
    exps, coeffs = exps[order], coeffs[order]

    # a new cluster starts wherever the gap to the previous exponent exceeds tol
    starts = np.flatnonzero(np.concatenate([[True], np.diff(exps) > tol]))
    ends = np.append(starts[1:], exps.size)

    out_e = exps[starts]
    out_c = np.empty(starts.size)
    for k, (i, j) in enumerate(zip(starts, ends)):
        out_c[k] = coeffs[i] if j - i == 1 else math.fsum(coeffs[i:j])

    keep = out_c != 0.0
    return out_e[keep], out_c[keep]


def power_kernel(beta: float, *, max_terms: int = DEFAULT_MAX_TERMS) -> ExponentSumSeries:
    r"""The power kernel :math:`h_\beta(t) = t^{\beta - 1} / \Gamma(\beta)`, ``beta > 0``."""
    if not beta > 0:
        raise DomainError(f"power kernel h_beta requires beta > 0, got {beta!r}")
    return ExponentSumSeries((beta - 1.0,), (rgamma(beta),), max_terms=max_terms)


def _check_t(t: float) -> None:
    if not t > 0:
        raise DomainError(f"series are evaluated at t > 0 only, got t = {t!r}")


def evaluate(s: ExponentSumSeries, t: float, *, full_output: bool = False) -> float | EvalResult:
    """Compensated evaluation of ``s`` at ``t > 0``.

    With ``full_output`` the result carries a flag that is set when the last
    retained term is not negligible (``> 1e-8`` of the value), which signals
    that the truncation order is too low for this ``t``.
    """
    _check_t(t)
    if s.is_zero:
        return EvalResult(0.0, False) if full_output else 0.0
    values = [c * t**e for e, c in zip(s.exponents, s.coefficients)]
    value = math.fsum(values)
    if not full_output:
        return value
    return EvalResult(value, abs(values[-1]) > TAIL_RTOL * abs(value))


def _budget_of(series: Sequence[ExponentSumSeries]) -> tuple[int, float]:
    return max(s.max_terms for s in series), min(s.exponent_tol for s in series)


def linear_combine(pairs: Sequence[tuple[float, ExponentSumSeries]]) -> ExponentSumSeries:
    """Weighted sum of series, merged and normalized.

    Raises :class:`BudgetError` if the merged sum has more terms than the
    largest budget of the inputs.
    """
    if not pairs:
        raise ValueError("linear_combine needs at least one (weight, series) pair")
    max_terms, tol = _budget_of([s for _, s in pairs])
    exps: list[float] = []
    coeffs: list[float] = []
    for w, s in pairs:
        exps.extend(s.exponents)
        coeffs.extend(float(w) * c for c in s.coefficients)
    out = ExponentSumSeries(
        tuple(exps),
        tuple(coeffs),
        max_terms=max(max_terms, len(exps)),
        exponent_tol=tol,
        truncated=any(s.truncated for _, s in pairs),
    )
    if len(out) > max_terms:
        raise BudgetError(f"linear combination has {len(out)} terms, budget is {max_terms}")
    return out.replace(max_terms=max_terms)


def _require_convolvable(s: ExponentSumSeries, what: str) -> None:
    if not s.convolvable:
        raise DomainError(
            f"{what}: series has exponent {s.leading_exponent:g} <= -1 and is not integrable at 0"
        )


def convolve(a: ExponentSumSeries, b: ExponentSumSeries) -> ExponentSumSeries:
    r"""Laplace convolution :math:`(a * b)(t) = \int_0^t a(t - \tau) b(\tau)\, d\tau`."""
    _require_convolvable(a, "convolve")
    _require_convolvable(b, "convolve")
    max_terms, tol = _budget_of([a, b])
    if a.is_zero or b.is_zero:
        return ExponentSumSeries.zero(max_terms=max_terms).replace(
            truncated=a.truncated or b.truncated
        )

    ea = np.asarray(a.exponents)[:, None]
    eb = np.asarray(b.exponents)[None, :]
    ca = np.asarray(a.coefficients)[:, None]
    cb = np.asarray(b.coefficients)[None, :]

    exps = (ea + eb + 1.0).ravel()
    coeffs = (ca * cb * special.beta(ea + 1.0, eb + 1.0)).ravel()

    out = ExponentSumSeries(
        tuple(exps),
        tuple(coeffs),
        max_terms=max_terms,
        exponent_tol=tol,
        truncated=a.truncated or b.truncated,
    )
    if out.is_zero and not np.all(coeffs == 0):
        raise BudgetError("convolution cancelled to an unrepresentable series")
    return out


def conv_power(s: ExponentSumSeries, n: int) -> ExponentSumSeries:
    """``n``-fold convolution power ``s * s * ... * s``."""
    if int(n) != n or n < 1:
        raise DomainError(f"convolution power requires an integer n >= 1, got {n!r}")
    result = s
    for _ in range(int(n) - 1):
        result = convolve(result, s)
    return result


def differentiate(s: ExponentSumSeries, m: int = 1) -> ExponentSumSeries:
    """``m``-th derivative, term by term.

    The result may have exponents ``<= -1``; it can still be evaluated at
    ``t > 0`` but :attr:`ExponentSumSeries.convolvable` is then false.
    """
    if int(m) != m or m < 0:
        raise DomainError(f"derivative order must be a nonnegative integer, got {m!r}")
    exps = np.asarray(s.exponents, dtype=float)
    coeffs = np.asarray(s.coefficients, dtype=float)
    for _ in range(int(m)):
        coeffs = coeffs * exps
        exps = exps - 1.0
    return s.replace(exponents=tuple(exps), coefficients=tuple(coeffs))


def antiderivative(s: ExponentSumSeries) -> ExponentSumSeries:
    r"""Primitive vanishing at 0, i.e. :math:`\{1\} * s`."""
    _require_convolvable(s, "antiderivative")
    exps = np.asarray(s.exponents, dtype=float)
    coeffs = np.asarray(s.coefficients, dtype=float)
    return s.replace(exponents=tuple(exps + 1.0), coefficients=tuple(coeffs / (exps + 1.0)))


def laplace(s: ExponentSumSeries, p: float) -> float:
    """Term-wise Laplace transform of the (truncated) series at ``p > 0``."""
    if not p > 0:
        raise DomainError(f"laplace requires p > 0, got {p!r}")
    _require_convolvable(s, "laplace")
    return math.fsum(
        c * gamma(e + 1.0) * p ** -(e + 1.0) for e, c in zip(s.exponents, s.coefficients)
    )
