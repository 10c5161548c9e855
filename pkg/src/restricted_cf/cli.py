"""Command-line interface.

Subcommands: expand, count, dimension, pole, verify, complex-count. Flags
override values from an optional ``key=value`` file given with ``--config``.
Exit codes: 0 on success, 1 on invalid input, 2 when a verification fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import asymptotics, spectral
from .enumeration import (
    DEFAULT_W_GRID,
    ThickenedWindow,
    enumerate_complex,
    enumerate_real,
    sigma_count,
    table_to_csv,
    thickened_count,
)
from .quadratic import (
    attainable_digits,
    cf_expand_complex,
    field,
    parse_quad_integer,
    parse_quad_rational,
    reconstruct_complex,
    unit_closure,
)
from .realcf import DomainError, cf_expand, reconstruct

EXIT_OK, EXIT_DOMAIN, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_int(text: str) -> int:
    """``"65536"`` or ``"2^16"``."""
    text = str(text).strip()
    if "^" in text:
        base, exp = text.split("^", 1)
        return int(base) ** int(exp)
    return int(text)


def parse_grid(text: str) -> list[int]:
    """``"2^a..2^b"`` (all powers of two in range) or a comma list."""
    text = str(text).strip()
    if ".." in text:
        lo, hi = (parse_int(t) for t in text.split("..", 1))
        if lo < 1 or hi < lo:
            raise ValueError(f"bad grid {text!r}")
        out, n = [], 1
        while n <= hi:
            if n >= lo:
                out.append(n)
            n *= 2
        return out
    return [parse_int(t) for t in text.split(",") if t.strip()]


def parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in str(text).split(",") if t.strip())


def read_config(path: str) -> dict[str, str]:
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            cfg[key.replace("-", "_")] = value
    return cfg


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _check_A(A: int) -> None:
    if A < 2:
        raise DomainError(f"A must be >= 2 for counting, got {A}")


# -- commands -------------------------------------------------------------------


def cmd_expand(args) -> int:
    if args.d is None:
        x = Fraction(args.value)
        if x == 0:
            digits, ok = (), True
        else:
            digits = cf_expand(x)
            ok = reconstruct(digits) == x
        text = "[" + ", ".join(str(a) for a in digits) + "]"
    else:
        z = parse_quad_rational(args.value, args.d)
        digits = cf_expand_complex(z)
        ok = (reconstruct_complex(digits) == z) if digits else not z
        F = field(args.d)
        text = "[" + ", ".join(F.format_pair(a.int_pair()) for a in digits) + "]"
    print(f"{text} {'verified' if ok else 'NOT verified'}")
    return EXIT_OK if ok else EXIT_DOMAIN


def cmd_count(args) -> int:
    _check_A(args.A)
    if args.N < 2:
        raise DomainError(f"N must be >= 2, got {args.N}")
    table = enumerate_real(args.A, args.N, w_grid=args.w_grid, workers=args.workers)
    summary = {"A": args.A, "N": args.N, "Omega": table.total(), "Sigma_N": sigma_count(table, args.N)}
    if args.gamma is not None:
        win = ThickenedWindow(args.N, args.gamma)
        summary.update(gamma=args.gamma, window=[win.n_low, args.N], thickened=thickened_count(table, win))
    if args.output:
        _write(args.output, table_to_csv(table))
    if args.format == "json":
        sys.stdout.write(dump_json(summary))
    else:
        line = f"Omega={summary['Omega']} Sigma_N={summary['Sigma_N']}"
        if args.gamma is not None:
            line += f" Sigma_eps={summary['thickened']} window={summary['window'][0]}..{args.N}"
        print(line)
    return EXIT_OK


def cmd_dimension(args) -> int:
    if args.A < 2:
        raise DomainError(f"dimension is 0 (degenerate alphabet A={args.A})")
    res = spectral.solve_dimension(args.A, tol=args.tol, m=args.m)
    _write(args.output, dump_json(res.as_record()))
    return EXIT_OK


def cmd_pole(args) -> int:
    s0 = spectral.solve_pole(args.A, args.w, tol=args.tol, m=args.m, window=args.window)
    _write(args.output, dump_json({"A": args.A, "w": args.w, "s0": s0, "m": args.m}))
    return EXIT_OK


def cmd_verify(args) -> int:
    _check_A(args.A)
    if args.gamma <= 0:
        raise DomainError(f"gamma must be > 0, got {args.gamma}")
    cfg = asymptotics.VerifyConfig(
        A=args.A,
        N_max=args.N_max,
        N_min=args.N_min,
        gamma=args.gamma,
        depth=args.depth,
        m=args.m,
        identity_only=args.identity_only,
        delta_override=args.inject_delta,
        workers=args.workers,
    )
    checks = asymptotics.run_verification(cfg)
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    if args.output:
        _write(args.output, dump_json({"passed": ok, "checks": [c.__dict__ for c in checks]}))
    return EXIT_OK if ok else EXIT_FAIL


def _alphabet(args):
    F = field(args.d)
    if args.alphabet:
        digits = [parse_quad_integer(t) for t in args.alphabet.split(",") if t.strip()]
        if args.unit_closure:
            digits = unit_closure(F, digits)
        return tuple(sorted(set(digits)))
    return attainable_digits(args.d, args.alphabet_norm)


def cmd_complex_count(args) -> int:
    if args.N < 1:
        raise DomainError(f"N must be >= 1, got {args.N}")
    alphabet = _alphabet(args)
    table = enumerate_complex(args.d, alphabet, args.N, w_grid=args.w_grid, workers=args.workers)
    summary = {"d": args.d, "N": args.N, "alphabet_size": len(alphabet), "Omega": table.total(), "Sigma_N": sigma_count(table, args.N)}
    if args.grid:
        grid = [n for n in parse_grid(args.grid) if n <= args.N]
        fit = asymptotics.complex_exponent_fit(args.d, alphabet, grid, table=table)
        summary["fit"] = fit.as_record()
    if args.output:
        _write(args.output, table_to_csv(table))
    if args.format == "json":
        sys.stdout.write(dump_json(summary))
    else:
        line = f"Omega={summary['Omega']} Sigma_N={summary['Sigma_N']}"
        if "fit" in summary:
            line += f" slope={summary['fit']['slope']!r}"
        print(line)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value file; flags take precedence")
    common.add_argument("--output", "-o", default=None, help="output file")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    parser = _Parser(prog="restricted-cf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("expand", parents=[common], help="continued fraction digits of a rational")
    p.add_argument("value", help='"a/n", or "(a+bw)/(c+ew)" with --d')
    p.add_argument("--d", type=int, default=None, help="imaginary quadratic field Q(sqrt(-d))")
    p.set_defaults(func=cmd_expand)
    subs["expand"] = p

    p = sub.add_parser("count", parents=[common], help="count bounded-digit rationals")
    p.add_argument("--A", type=int, required=False, default=None)
    p.add_argument("--N", type=parse_int, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--w-grid", type=parse_floats, default=DEFAULT_W_GRID)
    p.set_defaults(func=cmd_count)
    subs["count"] = p

    p = sub.add_parser("dimension", parents=[common], help="Hausdorff dimension of E_A")
    p.add_argument("--A", type=int, default=None)
    p.add_argument("--m", type=int, default=spectral.DEFAULT_NODES)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_dimension)
    subs["dimension"] = p

    p = sub.add_parser("pole", parents=[common], help="s0(w) with lambda(s0(w), w) = 1")
    p.add_argument("--A", type=int, default=None)
    p.add_argument("--w", type=float, default=0.0)
    p.add_argument("--m", type=int, default=spectral.DEFAULT_NODES)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--window", type=float, default=0.3)
    p.set_defaults(func=cmd_pole)
    subs["pole"] = p

    p = sub.add_parser("verify", parents=[common], help="empirical checks of the asymptotic laws")
    p.add_argument("--A", type=int, default=2)
    p.add_argument("--N-max", type=parse_int, default=2**16)
    p.add_argument("--N-min", type=parse_int, default=2**10)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--m", type=int, default=spectral.DEFAULT_NODES)
    p.add_argument("--identity-only", action="store_true")
    p.add_argument("--inject-delta", type=float, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    subs["verify"] = p

    p = sub.add_parser("complex-count", parents=[common], help="count bounded-digit field rationals")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--N", type=parse_int, default=None)
    p.add_argument("--alphabet", default=None, help='comma list such as "2+1w,1+3w"')
    p.add_argument("--unit-closure", action="store_true")
    p.add_argument("--alphabet-norm", type=int, default=8, help="all attainable digits up to this norm")
    p.add_argument("--grid", default=None, help='N grid for the exponent fit, e.g. "2^4..2^8"')
    p.add_argument("--w-grid", type=parse_floats, default=DEFAULT_W_GRID)
    p.set_defaults(func=cmd_complex_count)
    subs["complex-count"] = p
    return parser, subs


REQUIRED = {"count": ("A", "N"), "dimension": ("A",), "pole": ("A",), "complex-count": ("N",)}


def parse_args(argv) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        sp = subs[args.command]
        known = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, value in cfg.items():
            if key not in known or key in ("config", "help"):
                continue
            action = known[key]
            if action.const is True and action.nargs == 0:  # store_true
                defaults[key] = value.lower() in ("1", "true", "yes")
            else:
                defaults[key] = value
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    for name in REQUIRED.get(args.command, ()):
        if getattr(args, name) is None:
            raise UsageError(f"--{name} is required")
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        return args.func(args)
    except (UsageError, DomainError, ValueError, ZeroDivisionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
