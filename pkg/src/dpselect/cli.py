"""Command-line entry point: ``python -m dpselect <subcommand> ...``.

Exit codes: 0 success, 1 a check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import exact_analysis as ea
from . import limit_laws as ll
from . import sim_harness as sh

DEFAULT_SEED = sh.DEFAULT_SEED

LAW_NAMES = {
    "toll": "toll",
    "grand-fixedpoint": "grand_fixedpoint",
    "grand-perpetuity": "grand_perpetuity",
    "extremal": "extremal",
}
LAW_REFERENCE = {
    "toll": (ll.TOLL_MEAN, "partition toll limit"),
    "grand_fixedpoint": (ll.GRAND_MEAN, "random-rank fixed-point law"),
    "grand_perpetuity": (ll.GRAND_MEAN, "random-rank perpetuity law"),
    "extremal": (ll.EXTREMAL_MEAN, "minimum-rank perpetuity law"),
}


class CheckFailed(Exception):
    pass


def _rank_arg(text: str):
    if text in ("uniform", "min", "max"):
        return text
    try:
        r = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"rank must be uniform, min, max or an integer, got {text!r}")
    if r < 1:
        raise argparse.ArgumentTypeError("fixed rank must be >= 1")
    return r


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dpselect", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=("csv", "json")):
        sp.add_argument("--output", "-o", type=Path, help="write here instead of stdout")
        sp.add_argument("--format", choices=formats, default=formats[0])

    sp = sub.add_parser("exact", help="exact expected comparisons with closed-form residuals")
    sp.add_argument("--mode", choices=("grand", "min"), default="grand")
    sp.add_argument("--max-n", type=int, required=True)
    common(sp, ("csv",))

    sp = sub.add_parser("bruteforce", help="exhaustive averages over all permutations")
    sp.add_argument("--mode", choices=("grand", "min"), default="grand")
    sp.add_argument("--max-n", type=int, required=True)
    common(sp, ("csv",))

    sp = sub.add_parser("simulate", help="Monte Carlo selection runs")
    sp.add_argument("--algo", choices=sh.ALGOS, default="dual")
    sp.add_argument("--n", type=_positive, required=True)
    sp.add_argument("--trials", type=_positive, required=True)
    sp.add_argument("--rank", type=_rank_arg, default="uniform")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--workers", type=_positive, default=1)
    common(sp)

    sp = sub.add_parser("perpetuity", help="draw from a limit law")
    sp.add_argument("--law", choices=sorted(LAW_NAMES), required=True)
    sp.add_argument("--trials", type=_positive, required=True)
    sp.add_argument("--depth", type=int, default=None,
                    help="perpetuity depth or fixed-point iterations")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--histogram", type=_positive, metavar="BINS")
    common(sp)

    sp = sub.add_parser("fixedpoint-compare",
                        help="KS test: fixed-point sampler vs perpetuity sampler")
    sp.add_argument("--trials", type=_positive, default=100_000)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--level", type=float, default=0.001)
    common(sp)

    sp = sub.add_parser("table1", help="reproduce the results table by simulation")
    sp.add_argument("--fast", action="store_true", help="smaller trial budgets")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--workers", type=_positive, default=1)
    common(sp, ("json", "csv"))

    sp = sub.add_parser("preserve", help="exact randomness-preservation check")
    sp.add_argument("--n", type=int, required=True)
    common(sp)
    return p


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_exact(args) -> str:
    if args.max_n < 2:
        raise ValueError("--max-n must be >= 2")
    mode = "grand" if args.mode == "grand" else "extremal_min"
    rec = (ea.grand_average_recurrence if mode == "grand"
           else ea.extremal_average_recurrence)(args.max_n)
    closed = ea.closed_form_series(mode, args.max_n)
    text = rec.to_csv(residual_against=closed)
    if any(rec[n] != closed[n] for n in closed.values):
        raise CheckFailed(text)
    return text


def cmd_bruteforce(args) -> str:
    if not 1 <= args.max_n <= ea.ENUMERATION_LIMIT:
        raise ValueError(f"--max-n must lie in 1..{ea.ENUMERATION_LIMIT}")
    mode = "grand" if args.mode == "grand" else "min"
    rec = (ea.grand_average_recurrence if mode == "grand"
           else ea.extremal_average_recurrence)(max(args.max_n, 2))
    rows = [["n", "exact_num", "exact_den", "decimal", "source", "recurrence", "match"]]
    ok = True
    for n in range(1, args.max_n + 1):
        v = ea.brute_force_average(n, mode)
        match = v == rec[n]
        ok &= match
        rows.append([n, v.numerator, v.denominator, ea.format_decimal(v), "enumeration",
                     str(rec[n]), str(match).lower()])
    text = _csv(rows)
    if not ok:
        raise CheckFailed(text)
    return text


def cmd_simulate(args) -> str:
    cfg = sh.SimConfig(args.n, args.trials, args.algo, args.rank, args.seed, args.workers)
    rep = sh.run_trials(cfg)
    return rep.to_json() if args.format == "json" else rep.to_csv()


def cmd_perpetuity(args) -> str:
    law = LAW_NAMES[args.law]
    x = ll.draw_many(law, args.trials, args.seed, args.depth)
    if args.histogram:
        return ll.histogram_csv(x, args.histogram)
    s = ll.MomentSummary.from_array(x)
    ref, tag = LAW_REFERENCE[law]
    depth = args.depth if args.depth is not None else ll._default_depth(law)
    row = {"law": law, "trials": s.count, "depth": depth, "seed": args.seed,
           "mean": s.mean, "variance": s.variance, "second_moment": s.second_moment,
           "stderr": s.stderr, "min": s.min, "max": s.max, "reference_mean": ref,
           "paper_ref": tag}
    if args.format == "json":
        return json.dumps(row, indent=2, sort_keys=True) + "\n"
    return sh._rows_to_csv([row])


def cmd_fixedpoint_compare(args) -> str:
    a = ll.draw_many("grand_fixedpoint", args.trials, args.seed)
    b = ll.draw_many("grand_perpetuity", args.trials, args.seed + 1)
    res = ll.ks_two_sample(a, b, args.level)
    row = {"trials": args.trials, "seed": args.seed, "statistic": res.statistic,
           "pvalue": res.pvalue, "level": res.level, "reject": res.reject,
           "paper_ref": "fixed-point law equals perpetuity law"}
    text = (json.dumps(row, indent=2, sort_keys=True) + "\n" if args.format == "json"
            else sh._rows_to_csv([row]))
    if res.reject:
        raise CheckFailed(text)
    return text


def cmd_table1(args) -> str:
    if args.fast:
        rep = sh.table1(trials_small=20_000, trials_large=20_000, seed=args.seed,
                        workers=args.workers)
    else:
        rep = sh.table1(seed=args.seed, workers=args.workers)
    logging.getLogger(__name__).info("\n%s", rep.format())
    text = rep.to_json() if args.format == "json" else rep.to_csv()
    if not rep.passed:
        raise CheckFailed(text)
    return text


def cmd_preserve(args) -> str:
    rep = ea.randomness_preservation_check(args.n)
    rows = []
    for (ip, iq), counts in sorted(rep.counts.items()):
        rows.append({"n": args.n, "ip": ip, "iq": iq, "pattern_classes": len(counts),
                     "min_count": min(counts.values()), "max_count": max(counts.values()),
                     "uniform": (ip, iq) not in rep.failures,
                     "paper_ref": "partition preserves randomness"})
    if args.format == "json":
        text = json.dumps({"n": args.n, "uniform": rep.uniform, "cells": rows},
                          indent=2, sort_keys=True) + "\n"
    else:
        text = sh._rows_to_csv(rows)
    if not rep.uniform:
        raise CheckFailed(text)
    return text


COMMANDS = {
    "exact": cmd_exact,
    "bruteforce": cmd_bruteforce,
    "simulate": cmd_simulate,
    "perpetuity": cmd_perpetuity,
    "fixedpoint-compare": cmd_fixedpoint_compare,
    "table1": cmd_table1,
    "preserve": cmd_preserve,
}


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_bytes(text.encode("utf-8"))


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        text = COMMANDS[args.command](args)
    except CheckFailed as e:
        _emit(str(e), args.output)
        print(f"dpselect {args.command}: check failed", file=sys.stderr)
        return 1
    except (ValueError, ea.DomainError, ea.ResourceError, sh.ResourceError) as e:
        print(f"dpselect {args.command}: error: {e}", file=sys.stderr)
        return 2
    _emit(text, args.output)
    return 0


def main() -> None:
    sys.exit(run_cli())
