"""Exception hierarchy shared by all :mod:`genfrac` modules."""

from __future__ import annotations


class GenfracError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GenfracError, ValueError):
    """An argument lies outside the domain of the operation."""


class PoleError(DomainError):
    """Evaluation at a pole (e.g. the Gamma function at a nonpositive integer)."""


class ConvergenceError(GenfracError, ArithmeticError):
    """A series did not meet its stopping rule within the term cap."""


class BudgetError(GenfracError):
    """A term or node budget was exceeded."""


class SpecError(GenfracError, ValueError):
    """A kernel specification violates its parameter ranges."""


class DegenerateError(GenfracError, ValueError):
    """A triangular system has a vanishing leading coefficient."""


class UnsupportedError(GenfracError):
    """The requested construction is not available for these inputs."""


class ExprSyntaxError(GenfracError, ValueError):
    """A function expression could not be parsed.

    ``offset`` is the byte offset of the offending token and ``expected`` the
    set of token kinds that would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class DepthError(BudgetError):
    """An expression tree exceeds its depth or node budget."""


class SingularAtZeroError(DomainError):
    """A derivative of ``f`` has no finite limit at ``t = 0+``."""


class HypothesisError(GenfracError):
    """The hypotheses of a fundamental theorem are not met by the inputs."""
