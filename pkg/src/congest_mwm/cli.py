"""Command line: ``run``, ``sweep``, ``gen`` and ``verify``.

The exit status is 0 exactly when every requested check passes.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from .congest import DEFAULT_POLY_BOUND_EXP
from .harness import (
    format_rows,
    generate_instance,
    parse_instance,
    report_row,
    resolve_weight_max,
    run_pipeline,
    sweep_rows,
    verify_report_dict,
    write_instance,
)
from .reduction.records import parse_rational


def _rational(text: str) -> Fraction:
    try:
        value = parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational p/q: {text!r}") from None
    return value


def _epsilon(text: str) -> Fraction:
    eps = _rational(text)
    if not (0 < eps < 1):
        raise argparse.ArgumentTypeError("epsilon must lie strictly between 0 and 1")
    return eps


def _list(kind):
    def parse(text: str):
        return [kind(part) for part in text.split(",") if part.strip()]

    return parse


def _weight_max(text: str) -> str:
    s = text.strip()
    if not s.startswith("n^"):
        _rational(s)
    return s


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=_epsilon, default=Fraction(1, 2), help="budget p/q in (0, 1)")
    p.add_argument("--oracle", choices=["exact", "greedy"], default="exact")
    p.add_argument("--mode", choices=["seq", "dist"], default="seq")
    p.add_argument("--raise-cap", type=int, default=None, help="raises per class before a force-merge")
    p.add_argument("--poly-bound-exp", type=int, default=DEFAULT_POLY_BOUND_EXP)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="congest-mwm", description="Weighted-to-cardinality matching reduction toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="reduce one instance and check its certificate")
    run.add_argument("instance", help="instance file, or - for stdin")
    _common(run)
    run.add_argument("--format", choices=["json", "csv"], default="json")
    run.add_argument("--no-trace", action="store_true", help="omit the trace from JSON output")
    run.add_argument("--output", "-o", default=None)

    sw = sub.add_parser("sweep", help="run a grid of generated instances")
    _common(sw)
    sw.set_defaults(mode="dist")
    sw.add_argument("--n", type=_list(int), default=[4, 6, 8], help="comma-separated vertex counts")
    sw.add_argument("--epsilons", type=_list(_epsilon), default=None, help="comma-separated budgets")
    sw.add_argument(
        "--weight-max", type=_list(_weight_max), default=["4", "n^3"], help="e.g. 4,n^3"
    )
    sw.add_argument("--seed", type=int, default=0, help="first seed")
    sw.add_argument("--seeds", type=int, default=3, help="seeds per grid point")
    sw.add_argument("--edge-fraction", type=_rational, default=Fraction(1, 2))
    sw.add_argument("--format", choices=["csv", "json"], default="csv")
    sw.add_argument("--output", "-o", default=None)

    gen = sub.add_parser("gen", help="write a random instance")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--weight-max", type=_weight_max, default="4")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--poly-bound-exp", type=int, default=DEFAULT_POLY_BOUND_EXP)
    gen.add_argument("--output", "-o", default=None)

    ver = sub.add_parser("verify", help="recheck the certificate of a saved JSON report")
    ver.add_argument("report")
    ver.add_argument("--instance", default=None, help="recompute value and optimum from this file")
    ver.add_argument("--poly-bound-exp", type=int, default=DEFAULT_POLY_BOUND_EXP)
    return parser


def _cmd_run(args) -> int:
    inst = parse_instance(_read(args.instance), args.epsilon, args.poly_bound_exp)
    rep = run_pipeline(inst, args.epsilon, args.oracle, args.mode, args.raise_cap)
    if args.format == "json":
        text = json.dumps(rep.to_dict(include_trace=not args.no_trace), indent=2) + "\n"
    else:
        text = format_rows([report_row(rep, seed="", wmax=inst.max_weight())], "csv")
    _write(args.output, text)
    return 0 if rep.passed else 1


def _cmd_sweep(args) -> int:
    epsilons = args.epsilons or [args.epsilon]
    seeds = list(range(args.seed, args.seed + args.seeds))
    rows = sweep_rows(
        args.n,
        epsilons,
        args.weight_max,
        seeds,
        edge_fraction=args.edge_fraction,
        oracle=args.oracle,
        mode=args.mode,
        raise_cap=args.raise_cap,
        poly_bound_exp=args.poly_bound_exp,
    )
    _write(args.output, format_rows(rows, args.format))
    return 0 if all(r["certificate_pass"] for r in rows) else 1


def _cmd_gen(args) -> int:
    inst = generate_instance(
        args.n, args.m, resolve_weight_max(args.weight_max, args.n), args.seed, args.poly_bound_exp
    )
    _write(args.output, write_instance(inst))
    return 0


def _cmd_verify(args) -> int:
    d = json.loads(_read(args.report))
    if "trace" not in d:
        print("report has no trace; rerun without --no-trace", file=sys.stderr)
        return 2
    inst = None
    if args.instance is not None:
        inst = parse_instance(_read(args.instance), parse_rational(d["epsilon"]), args.poly_bound_exp)
    ok = verify_report_dict(d, inst)
    print("certificate: pass" if ok else "certificate: FAIL")
    return 0 if ok else 1


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "sweep": _cmd_sweep, "gen": _cmd_gen, "verify": _cmd_verify}
    try:
        return handler[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
