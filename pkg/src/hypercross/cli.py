"""Command line entry point.

Exit codes: 0 success, 1 invalid input, 2 theorem hypothesis violated,
3 numeric overflow.  Diagnostics go to stderr as a single line.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Any, Sequence

import numpy as np

from . import approx, bounds, crosses, spde
from .errors import CountOverflow, HypercrossError, HypothesisViolated
from .weights import CrossSpec, validate_spec

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_HYPOTHESIS = 2
EXIT_OVERFLOW = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def _num(x: Any) -> Any:
    """Round floats to 12 significant digits; keep integers exact."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.12g}")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


def _fmt(x: Any) -> str:
    if isinstance(x, float):
        return "" if not math.isfinite(x) else f"{x:.12g}"
    return "" if x is None else str(x)


def _dump(obj: Any) -> str:
    return json.dumps(_num(obj), indent=2, sort_keys=False) + "\n"


def load_spec(path: str) -> CrossSpec:
    with open(path) as fh:
        spec = CrossSpec.from_dict(json.load(fh))
    validate_spec(spec)
    return spec


def parse_grid(text: str) -> list[float]:
    """``a:b:n`` -> n values log-spaced from a to b inclusive."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:n, got {text!r}") from None
    if not (a > 0 and b > 0 and n >= 1):
        raise argparse.ArgumentTypeError("grid needs a, b > 0 and n >= 1")
    if n == 1:
        return [a]
    return [float(v) for v in np.geomspace(a, b, n)]


def worker_count() -> int:
    raw = os.environ.get("HYPERCROSS_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise HypercrossError(f"HYPERCROSS_THREADS must be an integer, got {raw!r}") from None
    return (os.cpu_count() or 1) if n == 0 else max(n, 1)


class _Out:
    def __init__(self, path: str | None):
        self.path = path

    def __enter__(self):
        self.fh = open(self.path, "w", newline="") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()


# -- subcommands ---------------------------------------------------------------

def cmd_count(args) -> int:
    spec = load_spec(args.spec)
    if args.brute_force:
        count = crosses.brute_force_count(spec, args.T)
        method = "brute-force"
    else:
        count = crosses.count_cross(spec, args.T, dim_cap=args.dim_cap, workers=worker_count())
        method = "exact"
    report = bounds.sandwich_report(spec, args.T, exact=False)
    out = {
        "T": args.T,
        "method": method,
        "exact": count.total,
        "records": count.records,
        "active_dim": crosses.active_dimension(spec, args.T),
        "lower": report.lower,
        "upper": report.upper,
        "hypotheses_ok": report.hypotheses_ok,
    }
    with _Out(args.out) as fh:
        fh.write(_dump(out))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    spec = load_spec(args.spec)
    stream = crosses.enumerate_cross(spec, args.T, expand=args.expand, dim_cap=args.dim_cap)
    lines = crosses.indices_csv(stream, spec.m) if args.expand else crosses.records_csv(stream)
    with _Out(args.out) as fh:
        for line in lines:
            fh.write(line)
    return EXIT_OK


def cmd_bounds(args) -> int:
    spec = load_spec(args.spec)
    grid = args.T_grid if args.T_grid else [args.T]
    reports = [bounds.sandwich_report(spec, T, dim_cap=args.dim_cap) for T in grid]
    with _Out(args.out) as fh:
        if args.format == "csv":
            fh.write("T,lower,exact,upper,hypotheses_ok\n")
            for r in reports:
                fh.write(",".join(_fmt(v) for v in (r.T, r.lower, r.exact, r.upper, r.hypotheses_ok)) + "\n")
        else:
            rows = [{"T": r.T, "lower": r.lower, "exact": r.exact, "upper": r.upper,
                     "constants": r.constants, "hypotheses_ok": r.hypotheses_ok} for r in reports]
            fh.write(_dump(rows[0] if len(rows) == 1 else rows))
    return EXIT_OK


def cmd_epsdim(args) -> int:
    spec = load_spec(args.spec)
    res = approx.eps_dimension(spec, args.eps, dim_cap=args.dim_cap)
    with _Out(args.out) as fh:
        fh.write(_dump({"eps": args.eps, "n": res.n, "bracket": list(res.bracket)}))
    return EXIT_OK


def cmd_convergence(args) -> int:
    spec = load_spec(args.spec)
    study = approx.rate_study(spec, args.eps_grid)
    with _Out(args.out) as fh:
        fh.write("eps,n,slope_running\n")
        for e, n, s in zip(study.eps, study.n, study.slope_running):
            fh.write(f"{_fmt(e)},{n},{_fmt(s)}\n")
    print(f"slope={study.slope:.12g} theory={study.theory:.12g}", file=sys.stderr)
    return EXIT_OK


def cmd_spde(args) -> int:
    config = spde.ModelConfig.load(args.config) if args.config else spde.ModelConfig()
    report = spde.demo_report(config, max_degree=args.max_degree, n_q=args.n_q)
    with _Out(args.out) as fh:
        fh.write(_dump(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hypercross", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, needs_T=True):
        p.add_argument("--spec", required=True, help="cross specification (JSON)")
        if needs_T:
            p.add_argument("--T", type=float, required=True, help="threshold T >= 1")
        p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("count", help="exact cardinality with lower/upper bounds")
    common(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="depth-first count (default)")
    mode.add_argument("--brute-force", action="store_true", help="scan an enclosing box")
    p.add_argument("--dim-cap", type=int)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("enumerate", help="stream the cross as CSV")
    common(p)
    p.add_argument("--expand", action="store_true", help="one row per unsigned index")
    p.add_argument("--dim-cap", type=int)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("bounds", help="sandwich report lower <= exact <= upper")
    p.add_argument("--spec", required=True)
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--T", type=float)
    grid.add_argument("--T-grid", type=parse_grid, help="a:b:n log-spaced thresholds")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--dim-cap", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("epsdim", help="eps-dimension bracket")
    common(p, needs_T=False)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--dim-cap", type=int)
    p.set_defaults(func=cmd_epsdim)

    p = sub.add_parser("convergence", help="n_eps over an eps grid with running slope (CSV)")
    common(p, needs_T=False)
    p.add_argument("--eps-grid", type=parse_grid, required=True, help="a:b:n log-spaced eps values")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("spde-demo", help="parametric diffusion coefficient report")
    p.add_argument("--config", help="model config JSON (defaults if omitted)")
    p.add_argument("--max-degree", type=int, default=3)
    p.add_argument("--n-q", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spde)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except HypothesisViolated as exc:
        code = EXIT_HYPOTHESIS
        msg = exc
    except (CountOverflow, OverflowError) as exc:
        code = EXIT_OVERFLOW
        msg = exc
    except (HypercrossError, ValueError, TypeError, KeyError, OSError) as exc:
        code = EXIT_INVALID
        msg = exc
    print(f"hypercross: {type(msg).__name__}: {msg}", file=sys.stderr)
    return code


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
