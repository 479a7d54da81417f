"""A small expression language for user functions ``f(t)``.

Grammar (``^`` binds tightest and is right associative, then unary minus,
then ``* /``, then ``+ -``)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := primary ('^' unary)?          exponent must be free of t
    primary := NUMBER | 't' | '(' expr ')'
             | FUNC '(' expr ')'             FUNC in exp sin cos sqrt log
             | 'h' '(' ['-'] NUMBER ')'      h(b) = t^(b-1) / Gamma(b)

Numbers are decimal or scientific literals.  Trees are immutable and
hashable, which lets derivatives be cached.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from genfrac.errors import DepthError, DomainError, ExprSyntaxError, SingularAtZeroError
from genfrac.expseries import ExponentSumSeries, differentiate as series_differentiate
from genfrac.specfun import rgamma

__all__ = [
    "Add",
    "Call",
    "Const",
    "Div",
    "Expr",
    "FunctionInput",
    "H",
    "Mul",
    "Neg",
    "Pow",
    "Sub",
    "Var",
    "diff_expr",
    "eval_expr",
    "parse_expr",
    "to_text",
    "value_at_zero",
]

MAX_DEPTH = 64
MAX_NODES = 10_000
MAX_TEXT_BYTES = 64 * 1024
MAX_DIFF_ORDER = 8
FUNCTIONS = ("exp", "sin", "cos", "sqrt", "log")
ZERO_PROBES = (1e-9, 1e-10, 1e-11)
ZERO_RTOL = 1e-6


# {{{ tree


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: Expr


@dataclass(frozen=True)
class Add:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow:
    base: Expr
    exponent: float


@dataclass(frozen=True)
class Call:
    name: str
    arg: Expr


@dataclass(frozen=True)
class H:
    """Power kernel ``h_beta(t) = t^(beta - 1) / Gamma(beta)``."""

    beta: float


Expr = Union[Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call, H]

T = Var()
ZERO = Const(0.0)
ONE = Const(1.0)


def _children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Add, Sub, Mul, Div)):
        return (e.left, e.right)
    if isinstance(e, (Neg, Call)):
        return (e.arg,)
    if isinstance(e, Pow):
        return (e.base,)
    return ()


def _size(e: Expr) -> tuple[int, int]:
    """Node count and depth, iteratively."""
    nodes, depth = 0, 0
    stack = [(e, 1)]
    while stack:
        node, d = stack.pop()
        nodes += 1
        depth = max(depth, d)
        if nodes > MAX_NODES:
            break
        stack.extend((c, d + 1) for c in _children(node))
    return nodes, depth


def _check_budget(e: Expr) -> Expr:
    nodes, depth = _size(e)
    if nodes > MAX_NODES:
        raise DepthError(f"expression exceeds the node budget of {MAX_NODES}")
    if depth > MAX_DEPTH:
        raise DepthError(f"expression depth {depth} exceeds the limit of {MAX_DEPTH}")
    return e


def _contains_t(e: Expr) -> bool:
    if isinstance(e, (Var, H)):
        return True
    return any(_contains_t(c) for c in _children(e))


# }}}


# {{{ simplifying constructors


def _const(e: Expr) -> float | None:
    return e.value if isinstance(e, Const) else None


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Expr, b: Expr) -> Expr:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Const(ca + cb)
    if ca == 0:
        return b
    if cb == 0:
        return a
    if isinstance(b, Neg):
        return sub(a, b.arg)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Const(ca - cb)
    if cb == 0:
        return a
    if ca == 0:
        return neg(b)
    if isinstance(b, Neg):
        return add(a, b.arg)
    return Sub(a, b)


def _split_const(e: Expr) -> tuple[float, Expr | None]:
    """Write ``e`` as ``c * rest`` with ``rest`` free of a leading constant."""
    if isinstance(e, Const):
        return e.value, None
    if isinstance(e, Neg):
        c, rest = _split_const(e.arg)
        return -c, rest
    if isinstance(e, Mul) and isinstance(e.left, Const):
        c, rest = _split_const(e.right)
        return e.left.value * c, rest
    return 1.0, e


def mul(a: Expr, b: Expr) -> Expr:
    ca, ra = _split_const(a)
    cb, rb = _split_const(b)
    c = ca * cb
    if c == 0:
        return ZERO
    if ra is None and rb is None:
        return Const(c)
    if ra is None or rb is None:
        rest = ra if rb is None else rb
    else:
        rest = Mul(ra, rb)
    if c == 1:
        return rest
    if c == -1:
        return Neg(rest)
    return Mul(Const(c), rest)


def div(a: Expr, b: Expr) -> Expr:
    cb = _const(b)
    if cb == 0:
        return Div(a, b)  # left for evaluation to report
    if cb is not None:
        return mul(Const(1.0 / cb), a)
    if _const(a) == 0:
        return ZERO
    return Div(a, b)


def power(base: Expr, exponent: float) -> Expr:
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    cb = _const(base)
    if cb is not None:
        try:
            return Const(_pow(cb, exponent))
        except DomainError:
            pass
    if isinstance(base, Pow) and float(exponent).is_integer():
        return Pow(base.base, base.exponent * exponent)
    return Pow(base, exponent)


# }}}


# {{{ parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number, name, op, end
    text: str
    offset: int  # byte offset


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {text[pos]!r}", byte_pos,
                frozenset({"number", "t", "function", "operator", "("}),
            )
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), byte_pos))
        byte_pos += len(m.group().encode("utf-8"))
        pos = m.end()
    tokens.append(_Token("end", "", byte_pos))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.i = 0
        self.depth = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, expected: set[str]) -> ExprSyntaxError:
        return ExprSyntaxError(message, self.tok.offset, frozenset(expected))

    def expect(self, text: str) -> _Token:
        if self.tok.text != text or self.tok.kind not in ("op",):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r} but found {found!r}", {text})
        return self.advance()

    def enter(self) -> None:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise DepthError(f"expression nesting exceeds the limit of {MAX_DEPTH}")

    def leave(self) -> None:
        self.depth -= 1

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}", {"+", "-", "*", "/", "^", "end"})
        return e

    def expr(self) -> Expr:
        self.enter()
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        self.leave()
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            rhs = self.unary()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            start = self.i
            self.enter()
            arg = self.unary()
            self.leave()
            # a bare negative literal is a constant, so printed constants round-trip
            if isinstance(arg, Const) and self.tokens[start].kind == "number" and self.i == start + 1:
                return Const(-arg.value)
            return Neg(arg)
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            offset = self.tok.offset
            self.enter()
            exponent = self.unary()
            self.leave()
            if _contains_t(exponent):
                raise ExprSyntaxError(
                    "exponent must be a constant (no t)", offset, frozenset({"constant"})
                )
            return Pow(base, _eval(exponent, 0.0))
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return Const(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if tok.text == "t":
                return T
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text == "h":
                self.expect("(")
                sign = 1.0
                if self.tok.kind == "op" and self.tok.text == "-":
                    self.advance()
                    sign = -1.0
                if self.tok.kind != "number":
                    raise self.error("h() takes a numeric literal", {"number"})
                beta = sign * float(self.advance().text)
                self.expect(")")
                return H(beta)
            raise ExprSyntaxError(
                f"unknown name {tok.text!r}", tok.offset,
                frozenset({"t", "h", *FUNCTIONS}),
            )
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}", {"number", "t", "function", "(", "-"})


def parse_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises :class:`ExprSyntaxError` (with byte offset and expected tokens) on
    malformed input and :class:`DepthError` when the tree is too deep or large.
    """
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", 0, frozenset({"number", "t", "function"}))
    if len(text.encode("utf-8")) > MAX_TEXT_BYTES:
        raise ExprSyntaxError(f"expression longer than {MAX_TEXT_BYTES} bytes", MAX_TEXT_BYTES)
    return _check_budget(_Parser(text).parse())


# }}}


# {{{ printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"cannot print non-finite constant {x!r}")
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x)) if x != 0 or math.copysign(1.0, x) > 0 else "0"
    return repr(x)


def _fmt_num(x: float) -> str:
    s = _num(x)
    return f"({s})" if s.startswith("-") else s


def _prec(e: Expr) -> int:
    return _PREC.get(type(e), 5)


def to_text(e: Expr) -> str:
    """Render ``e`` so that parsing the text gives back the same tree."""
    if isinstance(e, Const):
        return _fmt_num(e.value)
    if isinstance(e, Var):
        return "t"
    if isinstance(e, H):
        return f"h({_num(e.beta)})"
    if isinstance(e, Call):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.arg)
        # Neg of a literal must not collapse into a negative constant on reparse
        if _prec(e.arg) < 3 or isinstance(e.arg, Const):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        base = to_text(e.base)
        if _prec(e.base) <= 4 or isinstance(e.base, Const):
            base = f"({base})"
        return f"{base}^{_fmt_num(e.exponent)}"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    p = _prec(e)
    left = to_text(e.left)
    right = to_text(e.right)
    if _prec(e.left) < p:
        left = f"({left})"
    # left associative: an equal-precedence right operand needs parentheses
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left}{op}{right}"


# }}}


# {{{ evaluation


def _pow(x: float, y: float) -> float:
    if x == 0.0:
        if y < 0:
            raise DomainError("0 raised to a negative power")
        return 1.0 if y == 0 else 0.0
    if x < 0 and not float(y).is_integer():
        raise DomainError(f"negative base {x:g} with non-integer exponent {y:g}")
    try:
        return math.pow(x, y)
    except OverflowError:
        raise DomainError(f"overflow in {x:g}^{y:g}") from None


def _h(beta: float, t: float) -> float:
    r = rgamma(beta)
    if r == 0.0:
        return 0.0
    return r * _pow(t, beta - 1.0)


def _eval(e: Expr, t: float) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return t
    if isinstance(e, H):
        return _h(e.beta, t)
    if isinstance(e, Neg):
        return -_eval(e.arg, t)
    if isinstance(e, Add):
        return _eval(e.left, t) + _eval(e.right, t)
    if isinstance(e, Sub):
        return _eval(e.left, t) - _eval(e.right, t)
    if isinstance(e, Mul):
        return _eval(e.left, t) * _eval(e.right, t)
    if isinstance(e, Div):
        den = _eval(e.right, t)
        if den == 0.0:
            raise DomainError(f"division by zero at t = {t:g}")
        return _eval(e.left, t) / den
    if isinstance(e, Pow):
        return _pow(_eval(e.base, t), e.exponent)
    if isinstance(e, Call):
        x = _eval(e.arg, t)
        if e.name == "exp":
            try:
                return math.exp(x)
            except OverflowError:
                raise DomainError(f"exp overflow at t = {t:g}") from None
        if e.name == "sin":
            return math.sin(x)
        if e.name == "cos":
            return math.cos(x)
        if e.name == "sqrt":
            if x < 0:
                raise DomainError(f"sqrt of negative value at t = {t:g}")
            return math.sqrt(x)
        if e.name == "log":
            if x <= 0:
                raise DomainError(f"log of nonpositive value at t = {t:g}")
            return math.log(x)
    raise TypeError(f"not an expression node: {e!r}")


def eval_expr(ast: Expr, t: float) -> float:
    """Evaluate ``ast`` at ``t >= 0``."""
    if not t >= 0:
        raise DomainError(f"expressions are evaluated at t >= 0, got {t!r}")
    return _eval(ast, float(t))


# }}}


# {{{ differentiation


def _d(e: Expr) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, H):
        # d/dt t^(b-1)/Gamma(b) = t^(b-2)/Gamma(b-1)
        return ZERO if rgamma(e.beta - 1.0) == 0.0 and e.beta - 1.0 <= 0 else H(e.beta - 1.0)
    if isinstance(e, Neg):
        return neg(_d(e.arg))
    if isinstance(e, Add):
        return add(_d(e.left), _d(e.right))
    if isinstance(e, Sub):
        return sub(_d(e.left), _d(e.right))
    if isinstance(e, Mul):
        return add(mul(_d(e.left), e.right), mul(e.left, _d(e.right)))
    if isinstance(e, Div):
        u, v = e.left, e.right
        return div(sub(mul(_d(u), v), mul(u, _d(v))), power(v, 2.0))
    if isinstance(e, Pow):
        return mul(mul(Const(e.exponent), power(e.base, e.exponent - 1.0)), _d(e.base))
    if isinstance(e, Call):
        u = e.arg
        du = _d(u)
        if e.name == "exp":
            outer: Expr = e
        elif e.name == "sin":
            outer = Call("cos", u)
        elif e.name == "cos":
            outer = neg(Call("sin", u))
        elif e.name == "sqrt":
            outer = div(Const(0.5), e)
        elif e.name == "log":
            outer = div(ONE, u)
        else:
            raise TypeError(f"unknown function {e.name!r}")
        return mul(outer, du)
    raise TypeError(f"not an expression node: {e!r}")


@lru_cache(maxsize=256)
def diff_expr(ast: Expr, order: int = 1) -> Expr:
    """Exact ``order``-th derivative with light simplification."""
    if int(order) != order or order < 0:
        raise DomainError(f"derivative order must be a nonnegative integer, got {order!r}")
    if order > MAX_DIFF_ORDER:
        raise DomainError(f"derivative order {order} exceeds the limit of {MAX_DIFF_ORDER}")
    if order == 0:
        return ast
    return _check_budget(_d(diff_expr(ast, order - 1)))


def value_at_zero(ast: Expr, order: int = 0) -> float:
    """Limit of the ``order``-th derivative of ``ast`` as ``t -> 0+``.

    Direct evaluation at 0 is used when it is defined and the probes at
    ``1e-9, 1e-10, 1e-11`` approach it; otherwise the probes must agree to
    ``1e-6`` relative and a Richardson step gives the estimate.
    """
    d = diff_expr(ast, order)
    try:
        probes = [eval_expr(d, x) for x in ZERO_PROBES]
    except DomainError as exc:
        raise SingularAtZeroError(
            f"derivative of order {order} is undefined near t = 0: {exc}"
        ) from exc
    if not all(math.isfinite(v) for v in probes):
        raise SingularAtZeroError(f"derivative of order {order} is not finite near t = 0")

    try:
        v0 = eval_expr(d, 0.0)
    except DomainError:
        v0 = None
    if v0 is not None and math.isfinite(v0):
        gaps = [abs(v - v0) for v in probes]
        if gaps[2] <= gaps[1] <= gaps[0]:
            return v0

    v1, v2, v3 = probes
    scale = max(abs(v1), abs(v2), abs(v3), 1e-300)
    if abs(v1 - v3) > ZERO_RTOL * scale and abs(v1 - v3) > ZERO_RTOL:
        raise SingularAtZeroError(
            f"derivative of order {order} has no stable limit at t = 0 "
            f"(probes {v1:.6g}, {v2:.6g}, {v3:.6g}); f is not {order} times "
            "continuously differentiable at 0"
        )
    return v3 + (v3 - v2) / 9.0


# }}}


@dataclass(frozen=True)
class FunctionInput:
    """A user function: either an expression tree or an exponent-sum series."""

    expr: Expr | None = None
    series: ExponentSumSeries | None = None
    text: str | None = None

    def __post_init__(self) -> None:
        if (self.expr is None) == (self.series is None):
            raise ValueError("FunctionInput needs exactly one of expr or series")

    @classmethod
    def parse(cls, text: str) -> FunctionInput:
        return cls(expr=parse_expr(text), text=text)

    @classmethod
    def from_series(cls, s: ExponentSumSeries) -> FunctionInput:
        return cls(series=s)

    @property
    def is_series(self) -> bool:
        return self.series is not None

    def label(self) -> str:
        if self.text is not None:
            return self.text
        if self.expr is not None:
            return to_text(self.expr)
        return "series(" + "; ".join(f"{e:.17g}:{c:.17g}" for e, c in self.series.terms) + ")"

    def derivative(self, n: int) -> FunctionInput:
        if self.expr is not None:
            return FunctionInput(expr=diff_expr(self.expr, n))
        return FunctionInput(series=series_differentiate(self.series, n))

    def __call__(self, t):
        if self.series is not None:
            return self.series(t)
        if np.ndim(t) == 0:
            return eval_expr(self.expr, float(t))
        ts = np.asarray(t, dtype=float)
        return np.array([eval_expr(self.expr, float(x)) for x in ts.ravel()]).reshape(ts.shape)
