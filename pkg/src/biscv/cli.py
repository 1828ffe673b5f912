"""Command-line front end.

Subcommands: check, gamma, max-s, threshold, envelope, fisher, catalog.
JSON documents echo the resolved configuration for reproducibility; the
envelope table is emitted as CSV with a fixed header (or as JSON rows with
``--format json``).

Exit codes: 0 pass, 2 mathematical failure (a failing certificate, refused
chain precondition, or broken chain), 1 numerical or evaluation error
(reported as a structured JSON document), 64 usage error.

The environment variable BISCV_GRID_POINTS overrides the built-in default
grid size (2000); an explicit --grid-points beats both.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from typing import IO

from . import catalog, envelope, fisher, shape
from .errors import BiscvError, PreconditionError

__all__ = ["main", "run", "UsageError"]

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAIL = 2
EXIT_USAGE = 64

_DEFAULT_GRID_POINTS = shape.DEFAULT_GRID_POINTS
_DEFAULT_EPS = shape.DEFAULT_EPS
_DEFAULT_TOL = shape.DEFAULT_TOL


class UsageError(Exception):
    """Bad command line; maps to exit code 64."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # route argparse errors to exit 64
        raise UsageError(message)


def _default_grid_points() -> int:
    raw = os.environ.get("BISCV_GRID_POINTS")
    if raw is None:
        return _DEFAULT_GRID_POINTS
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"BISCV_GRID_POINTS must be an integer, got {raw!r}")
    return value


def _add_common(p: argparse.ArgumentParser, need_s: bool = True) -> None:
    p.add_argument("--dist", required=True, help="distribution spec string")
    if need_s:
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--s", type=float, help="concavity index s in (-1, inf]")
        g.add_argument("--s-star", type=float, dest="s_star",
                       help="transformed index s* in (-inf, 1]")
    p.add_argument("--grid-points", type=int, default=None)
    p.add_argument("--eps", type=float, default=_DEFAULT_EPS,
                   help="quantile mass excluded per tail (default 1e-8)")
    p.add_argument("--tol", type=float, default=_DEFAULT_TOL,
                   help="checker tolerance (default 1e-9)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--output", default=None, help="output path (default stdout)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="biscv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run concavity checkers")
    _add_common(p)
    p.add_argument("--method", choices=("iv", "iii", "midpoint", "all"),
                   default="all")

    p = sub.add_parser("gamma", help="Csorgo-Revesz constants")
    _add_common(p)

    p = sub.add_parser("max-s", help="supremal passing index by bisection")
    _add_common(p, need_s=False)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--search-tol", type=float, default=1e-3)

    p = sub.add_parser("threshold", help="mixture separation threshold")
    p.add_argument("--family", choices=("normmix", "tmix"), required=True)
    p.add_argument("--r", type=float, default=None)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--s", type=float)
    g.add_argument("--s-star", type=float, dest="s_star")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--search-tol", type=float, default=1e-3)
    p.add_argument("--grid-points", type=int, default=None)
    p.add_argument("--eps", type=float, default=_DEFAULT_EPS)
    p.add_argument("--tol", type=float, default=_DEFAULT_TOL)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--output", default=None)

    p = sub.add_parser("envelope", help="emit the envelope-bound table")
    _add_common(p)

    p = sub.add_parser("fisher", help="Fisher-information chain report")
    _add_common(p)
    p.add_argument("--rel-tol", type=float, default=1e-8)

    p = sub.add_parser("catalog", help="family metadata")
    p.add_argument("--dist", required=True)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--output", default=None)
    return parser


def _resolve_s(args) -> float:
    if getattr(args, "s", None) is not None:
        return float(args.s)
    return shape.from_star(float(args.s_star)).s


def _resolve_grid_points(args) -> int:
    n = args.grid_points if args.grid_points is not None else _default_grid_points()
    if n < 16:
        raise UsageError("--grid-points must be >= 16")
    return n


def _validate_eps(eps: float) -> float:
    if not 0.0 < eps < 0.1:
        raise UsageError("--eps must lie in (0, 0.1)")
    return eps


def _config_dict(args, s: float | None, grid_points: int | None,
                 fmt: str) -> dict:
    idx = shape.to_index(s) if s is not None else None
    return {
        "s": None if idx is None else idx.s,
        "s_star": None if idx is None else idx.s_star,
        "grid_points": grid_points,
        "eps": getattr(args, "eps", None),
        "tol": getattr(args, "tol", None),
        "format": fmt,
    }


def _encode_inf(v: float) -> float | str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _emit(text: str, args, stdout: IO[str]) -> None:
    if getattr(args, "output", None) not in (None, "-"):
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _emit_json(doc: dict, args, stdout: IO[str]) -> None:
    _emit(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n",
          args, stdout)


_METHODS = {
    "iv": shape.check_condition_iv,
    "iii": shape.check_condition_iii,
    "midpoint": shape.check_midpoint,
}


def _cmd_check(args, stdout: IO[str]) -> int:
    d = catalog.parse_spec(args.dist)
    s = _resolve_s(args)
    n = _resolve_grid_points(args)
    _validate_eps(args.eps)
    fmt = args.format or "json"
    if fmt != "json":
        raise UsageError("check only supports --format json")
    grid = shape.make_grid(d, n, args.eps)
    names = ("iv", "iii", "midpoint") if args.method == "all" else (args.method,)
    certs = [_METHODS[m](d, s, grid, args.tol) for m in names]
    ok = all(c.passed for c in certs)
    doc = {
        "command": "check",
        "dist": d.spec_string(),
        "config": _config_dict(args, s, n, fmt),
        "method": args.method,
        "certificates": [c.to_dict() for c in certs],
        "verdict": "pass" if ok else "fail",
    }
    _emit_json(doc, args, stdout)
    return EXIT_PASS if ok else EXIT_FAIL


def _cmd_gamma(args, stdout: IO[str]) -> int:
    d = catalog.parse_spec(args.dist)
    s = _resolve_s(args)
    n = _resolve_grid_points(args)
    _validate_eps(args.eps)
    fmt = args.format or "json"
    if fmt != "json":
        raise UsageError("gamma only supports --format json")
    grid = shape.make_grid(d, n, args.eps)
    report = shape.cr_report(d, s, grid)
    doc = {
        "command": "gamma",
        "dist": d.spec_string(),
        "config": _config_dict(args, s, n, fmt),
        "report": report.to_dict(),
        "grid": {"count": grid.count, "eps": grid.eps},
    }
    _emit_json(doc, args, stdout)
    return EXIT_PASS


def _cmd_max_s(args, stdout: IO[str]) -> int:
    d = catalog.parse_spec(args.dist)
    n = _resolve_grid_points(args)
    _validate_eps(args.eps)
    fmt = args.format or "json"
    if fmt != "json":
        raise UsageError("max-s only supports --format json")
    grid = shape.make_grid(d, n, args.eps)
    value = shape.max_s(d, args.lo, args.hi, args.search_tol, grid, args.tol)
    doc = {
        "command": "max-s",
        "dist": d.spec_string(),
        "config": _config_dict(args, None, n, fmt),
        "lo": args.lo,
        "hi": args.hi,
        "search_tol": args.search_tol,
        "max_s": value,
        "grid": grid.to_dict(),
    }
    _emit_json(doc, args, stdout)
    return EXIT_PASS


def _cmd_threshold(args, stdout: IO[str]) -> int:
    if args.family == "tmix" and args.r is None:
        raise UsageError("--family tmix requires --r")
    s = _resolve_s(args)
    n = _resolve_grid_points(args)
    _validate_eps(args.eps)
    fmt = args.format or "json"
    if fmt != "json":
        raise UsageError("threshold only supports --format json")
    value = shape.delta_threshold(args.family, s, args.lo, args.hi,
                                  args.search_tol, r=args.r,
                                  grid_points=n, eps=args.eps,
                                  check_tol=args.tol)
    doc = {
        "command": "threshold",
        "family": args.family,
        "r": args.r,
        "config": _config_dict(args, s, n, fmt),
        "lo": args.lo,
        "hi": args.hi,
        "search_tol": args.search_tol,
        "delta_threshold": value,
    }
    _emit_json(doc, args, stdout)
    return EXIT_PASS


def _cmd_envelope(args, stdout: IO[str]) -> int:
    d = catalog.parse_spec(args.dist)
    s = _resolve_s(args)
    n = _resolve_grid_points(args)
    _validate_eps(args.eps)
    fmt = args.format or "csv"
    grid = shape.make_grid(d, n, args.eps)
    rows = envelope.emit_envelope_table(d, s, grid)
    if fmt == "csv":
        buf = io.StringIO()
        envelope.write_envelope_csv(rows, buf)
        _emit(buf.getvalue(), args, stdout)
    else:
        doc = {
            "command": "envelope",
            "dist": d.spec_string(),
            "config": _config_dict(args, s, n, fmt),
            "rows": [{k: _encode_inf(v) for k, v in r.to_dict().items()}
                     for r in rows],
        }
        _emit_json(doc, args, stdout)
    return EXIT_PASS


def _cmd_fisher(args, stdout: IO[str]) -> int:
    d = catalog.parse_spec(args.dist)
    s = _resolve_s(args)
    n = _resolve_grid_points(args)
    _validate_eps(args.eps)
    fmt = args.format or "json"
    if fmt != "json":
        raise UsageError("fisher only supports --format json")
    report = fisher.check_fisher_chain(d, s, args.rel_tol, n, args.eps, args.tol)
    doc = {
        "command": "fisher",
        "dist": d.spec_string(),
        "config": _config_dict(args, s, n, fmt),
        "rel_tol": args.rel_tol,
        "report": report.to_dict(),
    }
    _emit_json(doc, args, stdout)
    return EXIT_PASS if report.chain_holds else EXIT_FAIL


def _cmd_catalog(args, stdout: IO[str]) -> int:
    d = catalog.parse_spec(args.dist)
    fmt = args.format or "json"
    if fmt != "json":
        raise UsageError("catalog only supports --format json")
    sup = d.support()
    max_s = d.max_known_s()
    if max_s is None:
        max_s_doc: float | str = "unknown"
    elif math.isinf(max_s):
        max_s_doc = "inf"
    else:
        max_s_doc = max_s
    name, params = d.spec_parts()
    constants = {}
    if hasattr(d, "normalization"):
        constants["normalization"] = d.normalization
    doc = {
        "command": "catalog",
        "dist": d.spec_string(),
        "family": name,
        "params": {k: v for k, v in params},
        "support": {"lo": _encode_inf(sup.lo), "hi": _encode_inf(sup.hi)},
        "max_known_s": max_s_doc,
        "constants": constants,
    }
    _emit_json(doc, args, stdout)
    return EXIT_PASS


_COMMANDS = {
    "check": _cmd_check,
    "gamma": _cmd_gamma,
    "max-s": _cmd_max_s,
    "threshold": _cmd_threshold,
    "envelope": _cmd_envelope,
    "fisher": _cmd_fisher,
    "catalog": _cmd_catalog,
}


def _emit_error(exc: BiscvError, args, stdout: IO[str]) -> None:
    doc = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    _emit(text, args, stdout)


def run(argv: list[str], stdout: IO[str] | None = None,
        stderr: IO[str] | None = None) -> int:
    """Execute one command; returns the exit status.

    Identical argv (and environment) produce byte-identical output.
    """
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    parser = _build_parser()
    args = None
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args, stdout)
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except PreconditionError as exc:
        # a refused mathematical hypothesis is a mathematical failure
        _emit_error(exc, args, stdout)
        return EXIT_FAIL
    except BiscvError as exc:
        _emit_error(exc, args, stdout)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run(sys.argv[1:]))
