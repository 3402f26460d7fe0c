"""Command line entry point: ``permoll {sweep,landscape,verify}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .harness.landscape import LandscapeConfig, run_landscape
from .harness.sweep import ALGORITHMS, SweepConfig, run_sweep
from .harness.verify import MODE_NAMES, build_grid, run_verify

log = logging.getLogger("permoll")


def _csv_list(kind):
    def parse(text: str):
        try:
            return [kind(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a comma separated list, got {text!r}") from None
    return parse


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)
    log.info("wrote %s", path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permoll", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="evaluations-to-optimum over problem sizes")
    sw.add_argument("--algo", choices=ALGORITHMS, required=True)
    sw.add_argument("--policy", default="log",
                    help="static:<lam> | log | adjust:<F>,<lmin>,<lmax> | theory:<c1>,<c2> (ollga only)")
    sw.add_argument("--sizes", type=_csv_list(int), default=[2 ** k for k in range(4, 12)])
    sw.add_argument("--runs", type=int, default=100)
    sw.add_argument("--seed", type=_u64, default=0)
    sw.add_argument("--budget-mult", type=float, default=50.0,
                    help="evaluation cap is budget-mult * n^2 * ln n")
    sw.add_argument("--family", choices=("exchange", "reverse", "jump"), default="exchange")
    sw.add_argument("--include-unfinished", action="store_true",
                    help="count runs that hit the budget in the summary")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out", default="-", help="raw per-run CSV (default: stdout)")
    sw.add_argument("--summary-out", default=None,
                    help="per-size summary CSV (default: <out>.summary.csv, or stdout)")

    ls = sub.add_parser("landscape", help="per-distance cost of improvement over a lambda lattice")
    ls.add_argument("--n", type=int, required=True)
    ls.add_argument("--lambda-min", type=float, default=1.0)
    ls.add_argument("--lambda-max", type=float, default=64.0)
    ls.add_argument("--step", type=float, default=1.05)
    ls.add_argument("--runs", type=int, default=200)
    ls.add_argument("--seed", type=_u64, default=0)
    ls.add_argument("--budget-mult", type=float, default=50.0)
    ls.add_argument("--workers", type=int, default=1)
    ls.add_argument("--out", default="-")

    vf = sub.add_parser("verify", help="Monte-Carlo check of the good-iteration lower bounds")
    vf.add_argument("--tau", type=int, choices=(0, -1, -2), required=True)
    vf.add_argument("--n", type=_csv_list(int), required=True)
    vf.add_argument("--f", type=_csv_list(str), required=True,
                    help="fitness values; integers or expressions in n such as ceil(sqrt(n)) or n-3")
    vf.add_argument("--lambda", dest="lam", type=_csv_list(int), required=True)
    vf.add_argument("--ell", type=_csv_list(int), required=True)
    vf.add_argument("--paired", action="store_true", help="zip the lambda and ell lists")
    vf.add_argument("--trials", type=int, default=1_000_000)
    vf.add_argument("--mode", choices=sorted(MODE_NAMES), default="proof")
    vf.add_argument("--parent", choices=("cycle", "random"), default="cycle")
    vf.add_argument("--seed", type=_u64, default=0)
    vf.add_argument("--workers", type=int, default=1)
    vf.add_argument("--out", default="-")
    return parser


def _sweep(args) -> int:
    config = SweepConfig(
        algo=args.algo, sizes=args.sizes, runs=args.runs, seed=args.seed, policy=args.policy,
        budget_mult=args.budget_mult, family=args.family,
        include_unfinished=args.include_unfinished, workers=args.workers,
    )
    result = run_sweep(config)
    _write(args.out, result.raw_csv())
    summary_out = args.summary_out
    if summary_out is None and args.out not in (None, "-"):
        summary_out = str(Path(args.out).with_suffix("")) + ".summary.csv"
    _write(summary_out, result.summary_csv())
    return 0


def _landscape(args) -> int:
    config = LandscapeConfig(
        n=args.n, lam_min=args.lambda_min, lam_max=args.lambda_max, step=args.step,
        runs=args.runs, seed=args.seed, budget_mult=args.budget_mult, workers=args.workers,
    )
    _write(args.out, run_landscape(config).to_csv())
    return 0


def _verify(args) -> int:
    points = build_grid(args.tau, args.n, args.f, args.lam, args.ell, args.mode, args.paired)
    result = run_verify(points, args.trials, args.seed, parent=args.parent, workers=args.workers)
    _write(args.out, result.to_csv())
    print(result.summary_line(), file=sys.stderr)
    return 0 if result.ok else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    handlers = {"sweep": _sweep, "landscape": _landscape, "verify": _verify}
    try:
        return handlers[args.command](args)
    except ValueError as exc:
        print(f"permoll: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
