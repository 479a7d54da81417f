"""Command-line front end.

Usage::

    genfrac kernels-list
    genfrac kernels-pair --family power --alpha 0.5
    genfrac kernels-associate --alpha 0.5 --coeffs 1,1 --terms 2
    genfrac apply --op gfd-c --family power --alpha 0.5 --fold 1 --fn "1"
    genfrac verify --theorem ft2-c --family power --alpha 0.5 --fn "exp(t)" --steps 512 --tol 5e-3
    genfrac laplace-check --family ml --alpha 0.25 --beta 0.6

Exit status: 0 success, 1 hypothesis or verification failure, 2 usage error,
3 numerical or convergence error.  Output goes to standard output unless
``--out`` is given; relative ``--out`` paths are resolved against
``$GENFRAC_OUTPUT_DIR`` when it is set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy

from genfrac import __version__
from genfrac.errors import (
    ExprSyntaxError,
    GenfracError,
    HypothesisError,
    SingularAtZeroError,
    SpecError,
    UnsupportedError,
)
from genfrac.expseries import ExponentSumSeries
from genfrac.funcexpr import FunctionInput
from genfrac.kernels import (
    DEFAULT_TERMS,
    FAMILIES,
    KernelSpec,
    associate_kernel,
    make_pair,
    pair_laplace_check,
)
from genfrac.operators import gfd_caputo, gfd_rl, gfi, verify

__all__ = ["EXIT_FAILED", "EXIT_NUMERIC", "EXIT_OK", "EXIT_USAGE", "main", "run"]

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

OUTPUT_DIR_ENV = "GENFRAC_OUTPUT_DIR"

COMMANDS = ("kernels-list", "kernels-pair", "kernels-associate", "apply", "verify", "laplace-check")
OPERATORS = {"gfi": gfi, "gfd-c": gfd_caputo, "gfd-rl": gfd_rl}
THEOREM_FLAGS = ("ft1-rl", "ft1-c", "ft2-rl", "ft2-c", "sonine", "index", "commute")

FAMILY_PARAMETERS = {
    "power": ("alpha", "kappa = h_alpha, k = h_(1-alpha)"),
    "tempered": ("alpha,rho", "kappa = exp(-rho t) h_alpha, k from its series"),
    "bessel": ("alpha", "kappa = t^((alpha-1)/2) J_(alpha-1)(2 sqrt t), k = t^(-alpha/2) I_(-alpha)(2 sqrt t)"),
    "ml": ("alpha,beta", "kappa = h_(1-beta+alpha) + h_(1-beta), k = t^(beta-1) E_(alpha,beta)(-t^alpha)"),
    "multiterm": ("weights,orders", "kappa = sum w_i h_(1-order_i), k from the lattice solver"),
    "series": ("alpha,coeffs", "kappa = t^(alpha-1)/Gamma(alpha) sum a_m t^m, k from the triangular solver"),
}


class UsageError(Exception):
    """Raised for flag values that parse but violate a precondition."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on its own errors already; keep the prefix stable
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"genfrac: error: {message}\n")


# {{{ value parsing


def _finite(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def _positive(text: str) -> float:
    value = _finite(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _nonnegative(text: str) -> float:
    value = _finite(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text!r}")
    return value


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if value < lo:
            raise argparse.ArgumentTypeError(f"expected an integer >= {lo}, got {value}")
        return value

    return parse


def _float_list(text: str) -> tuple[float, ...]:
    items = [x.strip() for x in text.split(",")]
    if not items or any(not x for x in items):
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")
    return tuple(_finite(x) for x in items)


def _positive_list(text: str) -> tuple[float, ...]:
    values = _float_list(text)
    if not all(v > 0 for v in values):
        raise argparse.ArgumentTypeError(f"expected positive numbers, got {text!r}")
    return values


# }}}


# {{{ parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="file of key = value lines using the flag names")
    p.add_argument("--out", metavar="PATH", help="write output to PATH instead of standard output")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (default: csv)")


def _add_kernel(p: argparse.ArgumentParser, *, family_required: bool = True) -> None:
    g = p.add_argument_group("kernel")
    g.add_argument("--family", choices=FAMILIES, required=family_required, help="kernel family")
    g.add_argument("--alpha", type=_finite, help="order parameter alpha")
    g.add_argument("--beta", type=_finite, help="second parameter of the ml pair")
    g.add_argument("--rho", type=_finite, help="tempering rate of the tempered pair")
    g.add_argument("--weights", type=_float_list, default=(), help="multiterm weights, comma separated")
    g.add_argument("--orders", type=_float_list, default=(), help="multiterm orders, comma separated")
    g.add_argument("--coeffs", type=_float_list, default=(), help="series coefficients a_0,a_1,...")
    g.add_argument(
        "--terms", type=_int_at_least(1), default=DEFAULT_TERMS,
        help=f"truncation order of infinite series (default: {DEFAULT_TERMS})",
    )


def _add_grid(p: argparse.ArgumentParser, steps: int) -> None:
    p.add_argument("--t-max", type=_positive, default=1.0, help="right end T of the grid (default: 1)")
    p.add_argument("--steps", type=_int_at_least(2), default=steps, help=f"number of grid steps M (default: {steps})")
    p.add_argument("--fold", type=_int_at_least(1), default=1, help="fold n of the operator (default: 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="genfrac",
        description="General fractional integrals and derivatives with Sonine kernels.",
    )
    parser.add_argument("--version", action="version", version=f"genfrac {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("kernels-list", help="list the kernel families and their parameters")
    _add_common(p)

    p = sub.add_parser("kernels-pair", help="print a Sonine pair and its residual")
    _add_common(p)
    _add_kernel(p)
    p.add_argument("--t-max", type=_positive, default=1.0, help="residual domain (0, T] (default: 1)")

    p = sub.add_parser("kernels-associate", help="solve for the associate coefficients b_0..b_(N-1)")
    _add_common(p)
    p.add_argument("--alpha", type=_finite, required=True, help="order parameter alpha in (0, 1)")
    p.add_argument("--coeffs", type=_float_list, required=True, help="coefficients a_0,a_1,... of the kernel")
    p.add_argument("--terms", type=_int_at_least(1), help="number N of coefficients b_0..b_(N-1) (default: number of coeffs)")

    p = sub.add_parser("apply", help="apply an operator to a function on a uniform grid")
    _add_common(p)
    _add_kernel(p)
    _add_grid(p, steps=512)
    p.add_argument("--op", choices=tuple(OPERATORS), required=True, help="operator to apply")
    p.add_argument("--fn", required=True, help="function of t, e.g. 'exp(-t)*t^2'")

    p = sub.add_parser("verify", help="check a fundamental-theorem identity")
    _add_common(p)
    _add_kernel(p)
    _add_grid(p, steps=512)
    p.add_argument("--theorem", choices=THEOREM_FLAGS, required=True, help="identity to check")
    p.add_argument("--fn", help="function of t (not needed for sonine)")
    p.add_argument("--tol", type=_nonnegative, default=5e-3, help="pass tolerance (default: 5e-3)")

    p = sub.add_parser("laplace-check", help="check p L[kappa](p) L[k](p) = 1")
    _add_common(p)
    _add_kernel(p)
    p.add_argument("--p", type=_positive_list, default=(0.5, 1.0, 2.0, 5.0), help="comma-separated p values")
    return parser


def _config_argv(command: str, path: str) -> list[str]:
    """Flags read from a ``key = value`` file, to be placed before the explicit ones."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc.strerror}") from None
    argv: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if not sep or not key:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        if key in ("config", "command"):
            raise UsageError(f"{path}:{lineno}: key {key!r} is not allowed in a config file")
        argv += [f"--{key}", value.strip()]
    return argv


def _find_config(argv: Sequence[str]) -> str | None:
    path = None
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif arg.startswith("--config="):
            path = arg.partition("=")[2]
    return path


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    """Parse ``argv``; flags from ``--config`` act as defaults for explicit ones."""
    parser = build_parser()
    argv = list(argv)
    config = _find_config(argv)
    if config is not None and argv and argv[0] in COMMANDS:
        try:
            extra = _config_argv(argv[0], config)
        except UsageError as exc:
            parser.error(str(exc))
        # argparse keeps the last occurrence, so explicit flags win
        argv = [argv[0], *extra, *argv[1:]]
    return parser.parse_args(argv)


# }}}


# {{{ output


def _num(x: float) -> str:
    return f"{x:.17g}"


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, (np.floating, np.integer)):
        return _json_value(x.item())
    return x


class Table:
    """One output table with metadata, rendered as CSV or JSON."""

    def __init__(self, columns: Sequence[str], rows: Sequence[Sequence], metadata: dict) -> None:
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.metadata = metadata

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.metadata.items():
            buf.write(f"# {k}={_meta_cell(v)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows([_cell(v) for v in row] for row in self.rows)
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "metadata": {k: _json_value(v) for k, v in self.metadata.items()},
            "columns": self.columns,
            "rows": [[_json_value(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return _num(float(v))
    if isinstance(v, dict):
        return ";".join(f"{k}:{_cell(x)}" for k, x in v.items())
    if isinstance(v, (tuple, list)):
        return ";".join(_cell(x) for x in v)
    return str(v)


def _meta_cell(v) -> str:
    # metadata echoes inputs, so the shortest round-tripping form reads best
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, dict):
        return ";".join(f"{k}:{_meta_cell(x)}" for k, x in v.items())
    if isinstance(v, (tuple, list)):
        return ",".join(_meta_cell(x) for x in v)
    return _cell(v)


def _versions() -> dict:
    return {"genfrac": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def _spec_dict(spec: KernelSpec) -> dict:
    out: dict = {"family": spec.family}
    for name in ("alpha", "beta", "rho", "weights", "orders", "coeffs"):
        v = getattr(spec, name)
        if v not in (None, ()):
            out[name] = list(v) if isinstance(v, tuple) else v
    out["terms"] = spec.terms
    return out


def _metadata(command: str, spec: KernelSpec | None = None, **extra) -> dict:
    meta: dict = {"command": command}
    if spec is not None:
        meta["spec"] = _spec_dict(spec)
    meta.update(extra)
    meta["versions"] = _versions()
    return meta


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# }}}


# {{{ commands


def _spec(args: argparse.Namespace) -> KernelSpec:
    return KernelSpec(
        family=args.family,
        alpha=args.alpha,
        beta=args.beta,
        rho=args.rho,
        weights=args.weights,
        orders=args.orders,
        coeffs=args.coeffs,
        terms=args.terms,
    )


def _series_rows(side: str, s: ExponentSumSeries) -> list[list]:
    return [[side, e, c] for e, c in s.terms]


def _cmd_kernels_list(args: argparse.Namespace) -> tuple[Table, int]:
    rows = [[fam, *FAMILY_PARAMETERS[fam]] for fam in FAMILIES]
    return Table(["family", "parameters", "pair"], rows, _metadata(args.command)), EXIT_OK


def _cmd_kernels_pair(args: argparse.Namespace) -> tuple[Table, int]:
    spec = _spec(args)
    pair = make_pair(spec, T=args.t_max)
    rows = _series_rows("kappa", pair.kappa) + _series_rows("k", pair.k)
    meta = _metadata(
        args.command, spec,
        residual=pair.residual_bound, T=args.t_max,
        truncated=pair.kappa.truncated or pair.k.truncated,
    )
    return Table(["side", "exponent", "coefficient"], rows, meta), EXIT_OK


def _cmd_kernels_associate(args: argparse.Namespace) -> tuple[Table, int]:
    if not 0 < args.alpha < 1:
        raise SpecError(f"--alpha must lie in (0, 1), got {args.alpha:g}")
    N = len(args.coeffs) if args.terms is None else args.terms
    b = associate_kernel(args.alpha, args.coeffs, N)
    rows = [[n, float(v)] for n, v in enumerate(b)]
    meta = _metadata(args.command, alpha=args.alpha, coeffs=list(args.coeffs), N=N)
    return Table(["n", "b"], rows, meta), EXIT_OK


def _cmd_apply(args: argparse.Namespace) -> tuple[Table, int]:
    spec = _spec(args)
    f = FunctionInput.parse(args.fn)
    pair = make_pair(spec)
    g = OPERATORS[args.op](pair, args.fold, f, args.t_max, args.steps)
    rows = [[t, v] for t, v in zip(g.t, g.values)]
    meta = _metadata(
        args.command, spec, op=args.op, n=args.fold, fn=args.fn,
        T=args.t_max, M=args.steps, residual=pair.residual_bound,
    )
    return Table(["t", "value"], rows, meta), EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> tuple[Table, int]:
    spec = _spec(args)
    if args.theorem != "sonine" and args.fn is None:
        raise UsageError(f"--fn is required for --theorem {args.theorem}")
    f = FunctionInput.parse(args.fn) if args.fn is not None else None
    pair = make_pair(spec, T=args.t_max)
    rep = verify(args.theorem, pair, args.fold, f, args.t_max, args.steps, args.tol)
    columns = [
        "theorem", "family", "n", "f", "T", "M", "path",
        "max_abs_error", "order", "tolerance", "pass",
    ]
    row = [
        rep.theorem, spec.family, args.fold, rep.parameters.get("f", ""), rep.T, rep.M,
        rep.path, rep.max_abs_error, rep.estimated_order_of_convergence, rep.tolerance,
        rep.passed,
    ]
    meta = _metadata(args.command, spec, tolerance=args.tol)
    return Table(columns, [row], meta), EXIT_OK if rep.passed else EXIT_FAILED


def _cmd_laplace_check(args: argparse.Namespace) -> tuple[Table, int]:
    spec = _spec(args)
    pair = make_pair(spec)
    rows = [[p, pair_laplace_check(pair, [p])] for p in args.p]
    worst = max(r[1] for r in rows)
    meta = _metadata(args.command, spec, max_error=worst)
    return Table(["p", "abs_error"], rows, meta), EXIT_OK


_COMMANDS = {
    "kernels-list": _cmd_kernels_list,
    "kernels-pair": _cmd_kernels_pair,
    "kernels-associate": _cmd_kernels_associate,
    "apply": _cmd_apply,
    "verify": _cmd_verify,
    "laplace-check": _cmd_laplace_check,
}


# }}}


def _exit_status(exc: BaseException) -> int:
    if isinstance(exc, (HypothesisError, SingularAtZeroError)):
        return EXIT_FAILED
    if isinstance(exc, (UsageError, SpecError, ExprSyntaxError, UnsupportedError)):
        return EXIT_USAGE
    return EXIT_NUMERIC


def run(argv: Sequence[str]) -> int:
    """Run one command; returns the exit status."""
    argv = list(argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        table, status = _COMMANDS[args.command](args)
    except (GenfracError, UsageError, ArithmeticError, ValueError) as exc:
        print(f"genfrac: error: {exc}", file=sys.stderr)
        return _exit_status(exc)

    try:
        _write(table.render(args.format), args.out)
    except OSError as exc:
        print(f"genfrac: error: cannot write {args.out!r}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    return status


def main(argv: Sequence[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
