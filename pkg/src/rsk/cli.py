"""Command-line front end: ``rsk verify <suite>`` and ``rsk invariant``."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import kernels, suites
from .errors import RskError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage already; keep the message on stderr
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _tolerance(text: str):
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected NAME=VALUE")
    try:
        return key.strip(), float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance value {val!r}") from None


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=None, help="RNG seed (falls back to $RSK_SEED, then 0)")
    p.add_argument("--samples", type=int, default=None, help="samples per check (default 10000; 500 for retraction)")
    p.add_argument("--m", type=int, default=2, help="twist multiplicity, must be even")
    p.add_argument("--delta", type=float, default=0.5, help="band width of the twist")
    p.add_argument("--grid", type=int, default=256, help="quadrature grid for H2 degrees")
    p.add_argument("--k-max", type=int, default=5, dest="k_max", help="largest power of the twist")
    p.add_argument("--tol", type=_tolerance, action="append", default=[], metavar="NAME=VALUE",
                   help="override a tolerance; names: " + ", ".join(sorted(suites.DEFAULT_TOLERANCES)))
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "md"), default="json")
    p.add_argument("--dump-curves", default=None, dest="dump_curves", metavar="DIR",
                   help="export pushed curves as CSV (t, alpha, beta)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rsk", description="Verification suites for real symplectic structures on S2 x S2.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("verify", help="run a check suite")
    v.add_argument("suite", choices=("all",) + suites.SUITES)
    _common(v)
    inv = sub.add_parser("invariant", help="winding classes of pushed gamma_A for k = 0..k-max")
    _common(inv)
    return parser


def _seed(arg):
    if arg is not None:
        return arg
    env = os.environ.get("RSK_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise RskError(f"RSK_SEED must be an integer, got {env!r}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = suites.RunConfig(
            seed=_seed(args.seed), samples=args.samples, m=args.m, delta=args.delta, grid=args.grid,
            k_max=args.k_max, tolerances=dict(args.tol), dump_curves=args.dump_curves,
        ).validate()
    except RskError as e:
        print(f"rsk: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    suite = "invariant" if args.command == "invariant" else args.suite
    kernels.warmup()
    try:
        report = suites.run(suite, cfg)
    except RskError as e:
        print(f"rsk: {e.code}: {e}", file=sys.stderr)
        return EXIT_FAIL
    text = report.to_markdown() if args.format == "md" else report.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    failed = [e for e in report.entries if not e.passed]
    for e in failed:
        print(f"FAIL {e.module}.{e.check} {e.params}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
