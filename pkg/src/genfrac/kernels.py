"""Sonine kernel catalog, associate-kernel construction and Sonine checks.

A pair ``(kappa, k)`` is a Sonine pair when ``(kappa * k)(t) = 1`` for
``t > 0``.  All catalog kernels are stored as truncated
:class:`~genfrac.expseries.ExponentSumSeries`, so pair checks run in exact
series arithmetic up to truncation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable, Sequence, Union

import numpy as np
from scipy import special

from genfrac.errors import DegenerateError, DomainError, SpecError, UnsupportedError
from genfrac.expseries import (
    ExponentSumSeries,
    antiderivative,
    convolve,
    evaluate,
    laplace,
    linear_combine,
    power_kernel,
)
from genfrac.specfun import rgamma

__all__ = [
    "FAMILIES",
    "IllConditionedWarning",
    "KernelSpec",
    "SoninePair",
    "associate_kernel",
    "associate_on_lattice",
    "build_associate",
    "build_kernel",
    "closed_form_laplace",
    "laplace_product_check",
    "make_pair",
    "pair_laplace_check",
    "sonine_residual",
]

FAMILIES = ("power", "tempered", "bessel", "ml", "multiterm", "series")
DEFAULT_TERMS = 60
GROWTH_RATIO_LIMIT = 1e3


class IllConditionedWarning(RuntimeWarning):
    """Associate coefficients grow faster than the monitoring ratio allows."""


# {{{ kernel specification


def _floats(values) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class KernelSpec:
    """Declarative description of a catalog kernel.

    ``family`` is one of :data:`FAMILIES`; the parameters used by each family:

    * ``power``: ``alpha``
    * ``tempered``: ``alpha``, ``rho``
    * ``bessel``: ``alpha``
    * ``ml``: ``alpha``, ``beta`` (the pair with a Mittag-Leffler associate)
    * ``multiterm``: ``weights``, ``orders``
    * ``series``: ``alpha``, ``coeffs`` (the analytic factor's Taylor coefficients)
    """

    family: str
    alpha: float | None = None
    beta: float | None = None
    rho: float | None = None
    weights: tuple[float, ...] = ()
    orders: tuple[float, ...] = ()
    coeffs: tuple[float, ...] = ()
    terms: int = DEFAULT_TERMS

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _floats(self.weights))
        object.__setattr__(self, "orders", _floats(self.orders))
        object.__setattr__(self, "coeffs", _floats(self.coeffs))
        for name in ("alpha", "beta", "rho"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, float(v))
        self._validate()

    def _require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) in (None, ()):
                raise SpecError(f"family {self.family!r} requires parameter {name!r}")

    def _validate(self) -> None:
        if self.family not in FAMILIES:
            raise SpecError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if int(self.terms) != self.terms or self.terms < 1:
            raise SpecError(f"truncation order must be a positive integer, got {self.terms!r}")
        for name in ("alpha", "beta", "rho", "weights", "orders", "coeffs"):
            v = getattr(self, name)
            vals = v if isinstance(v, tuple) else (() if v is None else (v,))
            if not all(math.isfinite(x) for x in vals):
                raise SpecError(f"parameter {name!r} must be finite")

        fam = self.family
        if fam in ("power", "tempered", "bessel", "series"):
            self._require("alpha")
            if not 0 < self.alpha < 1:
                raise SpecError(f"{fam} kernel requires 0 < alpha < 1, got {self.alpha:g}")
        if fam == "tempered":
            self._require("rho")
            if not self.rho >= 0:
                raise SpecError(f"tempered kernel requires rho >= 0, got {self.rho:g}")
        elif fam == "ml":
            self._require("alpha", "beta")
            if not 0 < self.alpha < self.beta < 1:
                raise SpecError(
                    f"ml pair requires 0 < alpha < beta < 1, got alpha={self.alpha:g}, "
                    f"beta={self.beta:g}"
                )
        elif fam == "multiterm":
            self._require("weights", "orders")
            if len(self.weights) != len(self.orders):
                raise SpecError("multiterm kernel needs as many weights as orders")
            if not all(0 < a < 1 for a in self.orders):
                raise SpecError("multiterm kernel requires every order in (0, 1)")
            if any(w == 0 for w in self.weights):
                raise SpecError("multiterm kernel weights must be nonzero")
        elif fam == "series":
            self._require("coeffs")
            if self.coeffs[0] == 0:
                raise SpecError("series kernel requires a nonzero leading coefficient a_0")

    # {{{ flat key-value serialization

    def to_text(self) -> str:
        lines = [f"family={self.family}"]
        for name in ("alpha", "beta", "rho"):
            v = getattr(self, name)
            if v is not None:
                lines.append(f"{name}={v!r}")
        for name in ("weights", "orders", "coeffs"):
            v = getattr(self, name)
            if v:
                lines.append(f"{name}={','.join(repr(x) for x in v)}")
        lines.append(f"terms={self.terms}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> KernelSpec:
        kwargs: dict[str, object] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep:
                raise SpecError(f"line {lineno}: expected key=value, got {line!r}")
            if key == "family":
                kwargs[key] = value
            elif key in ("alpha", "beta", "rho"):
                kwargs[key] = float(value)
            elif key in ("weights", "orders", "coeffs"):
                kwargs[key] = tuple(float(x) for x in value.split(",") if x.strip())
            elif key == "terms":
                kwargs[key] = int(value)
            else:
                raise SpecError(f"line {lineno}: unknown kernel key {key!r}")
        if "family" not in kwargs:
            raise SpecError("kernel description has no 'family' entry")
        return cls(**kwargs)  # type: ignore[arg-type]

    # }}}


# }}}


# {{{ associate construction


def associate_kernel(alpha: float, a: Sequence[float], N: int) -> np.ndarray:
    r"""Coefficients ``b`` of the associate of ``h_alpha(t) * sum_m a_m t^m``.

    The associate is ``h_{1-alpha}(t) * sum_m b_m t^m``; ``b`` solves the
    lower-triangular system

    .. math::

        a_0 b_0 = 1, \qquad
        \sum_{k=0}^{n} \Gamma(k + 1 - \alpha) \Gamma(\alpha + n - k)
            a_{n-k} b_k = 0, \quad n \ge 1,

    by forward substitution.  Row ``n`` is divided by ``n!`` so that the
    Gamma products become Beta values and stay bounded.  Missing ``a_m`` are
    zero.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"associate_kernel requires 0 < alpha < 1, got {alpha!r}")
    if int(N) != N or N < 1:
        raise DomainError(f"associate_kernel requires an integer N >= 1, got {N!r}")
    N = int(N)
    if len(a) == 0 or a[0] == 0:
        raise DegenerateError("associate kernel undefined: leading coefficient a_0 is zero")

    a_full = np.zeros(N)
    m = min(N, len(a))
    a_full[:m] = np.asarray(a[:m], dtype=float)

    b = np.zeros(N)
    b[0] = 1.0 / a_full[0]
    k_idx = np.arange(N, dtype=float)
    for n in range(1, N):
        ks = k_idx[:n]
        # B(k + 1 - alpha, alpha + n - k) = Gamma(.)Gamma(.) / n!
        w = special.beta(ks + 1.0 - alpha, alpha + n - ks)
        rhs = math.fsum(w * a_full[n - np.arange(n)] * b[:n])
        b[n] = -rhs / (special.beta(n + 1.0 - alpha, alpha) * a_full[0])
    _monitor_growth(b)
    return b


def _monitor_growth(b: np.ndarray) -> None:
    for n in range(1, b.size):
        if b[n - 1] != 0 and abs(b[n]) > GROWTH_RATIO_LIMIT * abs(b[n - 1]):
            warnings.warn(
                f"associate coefficients grow by more than {GROWTH_RATIO_LIMIT:g}x at "
                f"n={n} (|b_n|={abs(b[n]):.3g}); the truncation order is likely too high "
                "for this coefficient sequence",
                IllConditionedWarning,
                stacklevel=3,
            )
            return


def associate_on_lattice(
    e0: float, step: float, c: Sequence[float], N: int
) -> tuple[float, np.ndarray]:
    r"""Associate of a kernel supported on the exponent lattice ``e0 + j*step``.

    For ``kappa(t) = sum_j c_j t^{e0 + j step}`` with ``-1 < e0 < 0`` returns
    ``(f0, d)`` such that ``k(t) = sum_i d_i t^{f0 + i step}``, ``f0 = -1 - e0``,
    satisfies ``kappa * k = 1`` up to the ``N``-th lattice power.  For
    ``step = 1`` this reduces to the triangular system of
    :func:`associate_kernel`.
    """
    if not -1 < e0 < 0:
        raise DomainError(f"lattice associate requires a leading exponent in (-1, 0), got {e0:g}")
    if not step > 0:
        raise DomainError(f"lattice step must be positive, got {step!r}")
    if len(c) == 0 or c[0] == 0:
        raise DegenerateError("associate kernel undefined: leading coefficient is zero")
    N = int(N)
    f0 = -1.0 - e0
    c_full = np.zeros(N)
    m = min(N, len(c))
    c_full[:m] = np.asarray(c[:m], dtype=float)

    j = np.arange(N, dtype=float)
    d = np.zeros(N)
    d[0] = 1.0 / (c_full[0] * special.beta(e0 + 1.0, f0 + 1.0))
    for n in range(1, N):
        i = j[:n]
        w = special.beta(e0 + 1.0 + (n - i) * step, f0 + 1.0 + i * step)
        rhs = math.fsum(w * c_full[n - np.arange(n)] * d[:n])
        d[n] = -rhs / (c_full[0] * special.beta(e0 + 1.0, f0 + 1.0 + n * step))
    _monitor_growth(d)
    return f0, d


def _common_step(offsets: Sequence[float], max_den: int = 1000) -> float:
    fracs = []
    for x in offsets:
        fr = Fraction(x).limit_denominator(max_den)
        if abs(float(fr) - x) > 1e-9:
            raise UnsupportedError(
                f"multiterm orders are not commensurable (offset {x!r} is not rational "
                f"with denominator <= {max_den})"
            )
        if fr:
            fracs.append(fr)
    if not fracs:
        return 1.0
    den = reduce(math.lcm, (f.denominator for f in fracs))
    num = reduce(math.gcd, (f.numerator * (den // f.denominator) for f in fracs))
    return num / den


# }}}


# {{{ catalog


def _scaled_terms(exps, coeffs, N: int, truncated: bool) -> ExponentSumSeries:
    s = ExponentSumSeries(tuple(exps), tuple(coeffs), max_terms=max(N, len(exps)))
    return s.replace(truncated=truncated)


def _tempered_series(alpha: float, rho: float, N: int) -> ExponentSumSeries:
    # h_{alpha,rho}(t) = t^{alpha-1} e^{-rho t} / Gamma(alpha)
    m = np.arange(N)
    coeffs = [rgamma(alpha) * (-rho) ** int(k) / math.factorial(int(k)) for k in m]
    return _scaled_terms(alpha - 1.0 + m, coeffs, N, truncated=rho != 0 and N > 0)


def build_kernel(spec: KernelSpec) -> ExponentSumSeries:
    """Truncated series of the kernel ``kappa`` described by ``spec``."""
    N = spec.terms
    fam = spec.family
    if fam == "power":
        return power_kernel(spec.alpha, max_terms=max(N, 1))
    if fam == "tempered":
        return _tempered_series(spec.alpha, spec.rho, N)
    if fam == "bessel":
        a = spec.alpha
        m = np.arange(N)
        coeffs = [(-1.0) ** k / math.factorial(int(k)) * rgamma(k + a) for k in m]
        return _scaled_terms(a - 1.0 + m, coeffs, N, truncated=True)
    if fam == "ml":
        a, b = spec.alpha, spec.beta
        return linear_combine([(1.0, power_kernel(1.0 - b + a)), (1.0, power_kernel(1.0 - b))])
    if fam == "multiterm":
        return linear_combine(
            [(w, power_kernel(1.0 - o, max_terms=max(N, len(spec.orders))))
             for w, o in zip(spec.weights, spec.orders)]
        )
    if fam == "series":
        a = spec.alpha
        coeffs = spec.coeffs[:N]
        m = np.arange(len(coeffs))
        return _scaled_terms(a - 1.0 + m, [c * rgamma(a) for c in coeffs], N, truncated=False)
    raise SpecError(f"unknown kernel family {fam!r}")  # pragma: no cover


def build_associate(spec: KernelSpec) -> ExponentSumSeries:
    """Truncated series of the associate kernel ``k`` of the catalog kernel."""
    N = spec.terms
    fam = spec.family
    if fam == "power":
        return power_kernel(1.0 - spec.alpha, max_terms=max(N, 1))
    if fam == "tempered":
        a, rho = spec.alpha, spec.rho
        h = _tempered_series(1.0 - a, rho, N).replace(max_terms=N + 1)
        k = linear_combine([(1.0, h), (rho, antiderivative(h))]) if rho else h
        # the antiderivative reaches one power further than h; keep N terms
        return k.replace(max_terms=N)
    if fam == "bessel":
        a = spec.alpha
        m = np.arange(N)
        coeffs = [rgamma(k + 1.0 - a) / math.factorial(int(k)) for k in m]
        return _scaled_terms(m - a, coeffs, N, truncated=True)
    if fam == "ml":
        # t^{beta-1} E_{alpha,beta}(-t^alpha), expanded
        a, b = spec.alpha, spec.beta
        m = np.arange(N)
        coeffs = [(-1.0) ** k * rgamma(a * k + b) for k in m]
        return _scaled_terms(b - 1.0 + a * m, coeffs, N, truncated=True)
    if fam == "multiterm":
        kappa = build_kernel(spec)
        e0 = kappa.leading_exponent
        step = _common_step([e - e0 for e in kappa.exponents])
        c = np.zeros(int(round((kappa.exponents[-1] - e0) / step)) + 1)
        for e, coef in kappa.terms:
            c[int(round((e - e0) / step))] += coef
        f0, d = associate_on_lattice(e0, step, c, N)
        return _scaled_terms(f0 + step * np.arange(N), d, N, truncated=True)
    if fam == "series":
        a = spec.alpha
        b = associate_kernel(a, spec.coeffs, N)
        m = np.arange(N)
        return _scaled_terms(m - a, b * rgamma(1.0 - a), N, truncated=True)
    raise SpecError(f"unknown kernel family {fam!r}")  # pragma: no cover


# }}}


# {{{ Sonine pairs and checks


@dataclass(frozen=True)
class SoninePair:
    """A kernel ``kappa`` and its associate ``k`` with a recorded residual bound."""

    kappa: ExponentSumSeries
    k: ExponentSumSeries
    residual_bound: float
    domain_T: float = 1.0
    spec: KernelSpec | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        for name in ("kappa", "k"):
            e = getattr(self, name).leading_exponent
            if not -1 < e < 0:
                raise DomainError(
                    f"Sonine pair member {name} must have a leading exponent in (-1, 0), "
                    f"got {e:g}"
                )


def residual_grid(T: float, n_points: int) -> np.ndarray:
    """Geometric grid of ``n_points`` in ``(0, T]``, dense near 0."""
    if not T > 0:
        raise DomainError(f"residual domain must have T > 0, got {T!r}")
    if n_points < 1:
        raise DomainError(f"need at least one residual point, got {n_points}")
    if n_points == 1:
        return np.array([T])
    return np.geomspace(T * 1e-6, T, n_points)


def sonine_residual(
    kappa: ExponentSumSeries, k: ExponentSumSeries, T: float = 1.0, n_points: int = 64
) -> float:
    """``max |(kappa * k)(t) - 1|`` over a geometric grid in ``(0, T]``."""
    prod = convolve(kappa, k)
    return max(abs(evaluate(prod, float(t)) - 1.0) for t in residual_grid(T, n_points))


def make_pair(spec: KernelSpec, T: float = 1.0, n_points: int = 64) -> SoninePair:
    """Build the Sonine pair of ``spec`` and record its residual on ``(0, T]``."""
    if not T > 0:
        raise DomainError(f"pair domain must have T > 0, got {T!r}")
    kappa = build_kernel(spec)
    k = build_associate(spec)
    return SoninePair(kappa, k, sonine_residual(kappa, k, T, n_points), float(T), spec)


LaplaceSide = Union[ExponentSumSeries, Callable[[float], float]]


def closed_form_laplace(spec: KernelSpec) -> tuple[Callable[[float], float], Callable[[float], float]] | None:
    """Closed-form Laplace transforms ``(L kappa, L k)`` where the catalog has them.

    Returns ``None`` for families whose associate is only known as a series.
    """
    fam = spec.family
    a = spec.alpha
    if fam == "power":
        return (lambda p: p**-a), (lambda p: p ** (a - 1.0))
    if fam == "tempered":
        rho = spec.rho
        return (lambda p: (p + rho) ** -a), (lambda p: (p + rho) ** a / p)
    if fam == "bessel":
        return (lambda p: p**-a * math.exp(-1.0 / p)), (lambda p: p ** (a - 1.0) * math.exp(1.0 / p))
    if fam == "ml":
        b = spec.beta
        return (
            (lambda p: p ** (b - a - 1.0) + p ** (b - 1.0)),
            (lambda p: p ** (a - b) / (p**a + 1.0)),
        )
    return None


def _transform(side: LaplaceSide, p: float) -> float:
    if isinstance(side, ExponentSumSeries):
        return laplace(side, p)
    return float(side(p))


def laplace_product_check(kappa: LaplaceSide, k: LaplaceSide, p_grid: Sequence[float]) -> float:
    """``max |p * L[kappa](p) * L[k](p) - 1|`` over ``p_grid``.

    Each side is a series (transformed term by term) or a callable returning
    the transform directly.
    """
    if len(p_grid) == 0:
        raise DomainError("laplace_product_check needs at least one p")
    worst = 0.0
    for p in p_grid:
        if not p > 0:
            raise DomainError(f"Laplace check requires p > 0, got {p!r}")
        worst = max(worst, abs(p * _transform(kappa, p) * _transform(k, p) - 1.0))
    return worst


def pair_laplace_check(pair: SoninePair, p_grid: Sequence[float]) -> float:
    """Laplace-domain Sonine check for a catalog pair.

    A side stored as an untruncated series (exact) is transformed term by
    term; a truncated side uses the family's closed form when one exists,
    since the term-wise transform of e.g. the Mittag-Leffler associate only
    converges for ``p > 1``.
    """
    closed = closed_form_laplace(pair.spec) if pair.spec is not None else None
    sides: list[LaplaceSide] = []
    for i, s in enumerate((pair.kappa, pair.k)):
        sides.append(closed[i] if (s.truncated and closed is not None) else s)
    return laplace_product_check(sides[0], sides[1], p_grid)


# }}}
