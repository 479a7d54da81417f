"""General fractional calculus with Sonine kernels.

Exact exponent-sum series arithmetic for kernels and their associates, the
general fractional integral and derivatives built from them, and a harness
that checks the fundamental theorems numerically.
"""

from __future__ import annotations

__version__ = "0.1.0"

from genfrac.errors import (
    BudgetError,
    ConvergenceError,
    DegenerateError,
    DepthError,
    DomainError,
    ExprSyntaxError,
    GenfracError,
    HypothesisError,
    PoleError,
    SingularAtZeroError,
    SpecError,
    UnsupportedError,
)
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
from genfrac.funcexpr import FunctionInput, diff_expr, eval_expr, parse_expr, to_text, value_at_zero
from genfrac.kernels import (
    FAMILIES,
    KernelSpec,
    SoninePair,
    associate_kernel,
    build_associate,
    build_kernel,
    laplace_product_check,
    make_pair,
    pair_laplace_check,
    sonine_residual,
)
from genfrac.operators import (
    THEOREMS,
    GridFunction,
    VerificationReport,
    apply_kernel,
    gfd_caputo,
    gfd_rl,
    gfi,
    verify,
)
from genfrac.specfun import bessel, gamma, mittag_leffler, rgamma

__all__ = [
    "FAMILIES",
    "THEOREMS",
    "BudgetError",
    "ConvergenceError",
    "DegenerateError",
    "DepthError",
    "DomainError",
    "ExponentSumSeries",
    "ExprSyntaxError",
    "FunctionInput",
    "GenfracError",
    "GridFunction",
    "HypothesisError",
    "KernelSpec",
    "PoleError",
    "SingularAtZeroError",
    "SoninePair",
    "SpecError",
    "UnsupportedError",
    "VerificationReport",
    "antiderivative",
    "apply_kernel",
    "associate_kernel",
    "bessel",
    "build_associate",
    "build_kernel",
    "conv_power",
    "convolve",
    "diff_expr",
    "differentiate",
    "eval_expr",
    "evaluate",
    "gamma",
    "gfd_caputo",
    "gfd_rl",
    "gfi",
    "laplace",
    "laplace_product_check",
    "linear_combine",
    "make_pair",
    "mittag_leffler",
    "pair_laplace_check",
    "parse_expr",
    "power_kernel",
    "rgamma",
    "sonine_residual",
    "to_text",
    "value_at_zero",
    "verify",
]
