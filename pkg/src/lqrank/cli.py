"""Command-line interface.

Subcommands: ``test`` (rank test on CSV data), ``quantile`` (log-quantiles
of the permuted statistic), ``simulate`` (Monte Carlo studies), and
``diagnose`` (log-average convergence check). Exit codes separate the
statistical outcome from operational failures: 0 fail to reject, 3 reject,
1 usage error, 2 data error.
"""

import argparse
import csv
import dataclasses
import json
import math
import os
import sys

import numpy as np

from ._rng import DIAGNOSTIC_STREAM, substream
from ._validation import check_alpha
from .lqe import LqeQuantile, _per_permutation_quantiles, asclt_diagnostic, lqe_test
from .rank_engine import CSampleDataset
from .rank_statistics import scaled_kw_trace
from .sim_harness import (
    SimulationReport,
    desk_config,
    full_scale_config,
    load_config,
    render_table,
    run_study,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_REJECT = 3


class DataError(Exception):
    """Problem with user-supplied data or config content."""


class UsageError(Exception):
    """Bad flag combination or value."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved for data
    # errors here, so remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(parser):
    parser.add_argument("--permutations", type=int, default=20,
                        help="reorderings averaged in the quantile (default 20)")
    parser.add_argument("--burn-in", type=int, default=5, dest="burn_in",
                        help="initial prefixes excluded from the log-average "
                             "distribution (default 5)")
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed; falls back to $LQE_SEED, then 0")
    parser.add_argument("--format", choices=("table", "json"), default="table",
                        help="output rendering (default table)")


def _add_dependence(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--dependent", dest="dependent", action="store_true",
                       help="columns may be dependent within a row; reorder "
                            "whole rows (default)")
    group.add_argument("--independent", dest="dependent", action="store_false",
                       help="columns are independent samples; reorder each "
                            "column separately")
    parser.set_defaults(dependent=True)


def build_parser():
    parser = _Parser(prog="lqrank",
                     description="Rank tests via logarithmic quantile estimation.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p_test = sub.add_parser(
        "test", help="c-sample equality test on a CSV file",
        description="Test equality of the column distributions of a CSV file "
                    "(header row, one joint observation per line).")
    p_test.add_argument("csv_path", help="input CSV path")
    p_test.add_argument("--alpha", type=float, default=0.10,
                        help="test level (default 0.10)")
    _add_common(p_test)
    _add_dependence(p_test)

    p_quant = sub.add_parser(
        "quantile", help="averaged log-quantiles of the permuted statistic",
        description="Averaged logarithmic quantiles of the scaled "
                    "Kruskal-Wallis statistic over reorderings of a CSV file.")
    p_quant.add_argument("csv_path", help="input CSV path")
    p_quant.add_argument("--alpha", type=float, action="append", dest="alphas",
                         metavar="ALPHA",
                         help="quantile level; repeatable "
                              "(default 0.99 0.95 0.90)")
    _add_common(p_quant)
    _add_dependence(p_quant)

    p_sim = sub.add_parser(
        "simulate", help="run a Monte Carlo study",
        description="Run a quantile, significance, or power study from a "
                    "preset or a JSON config file.")
    p_sim.add_argument("config", nargs="?", default=None,
                       help="JSON config file; omit to use a preset")
    p_sim.add_argument("--study", choices=("quantiles", "significance", "power"),
                       help="preset study when no config file is given")
    p_sim.add_argument("--paper-scale", action="store_true", dest="paper_scale",
                       help="full published-table settings instead of the "
                            "desk-scale preset")
    p_sim.add_argument("--replications", type=int, default=None,
                       help="override replication count")
    p_sim.add_argument("--permutations", type=int, default=None,
                       help="override permutation count")
    p_sim.add_argument("--burn-in", type=int, default=None, dest="burn_in",
                       help="override burn-in")
    p_sim.add_argument("--alpha", type=float, action="append", dest="alphas",
                       metavar="ALPHA", help="override levels; repeatable")
    p_sim.add_argument("--n", type=int, action="append", dest="n_values",
                       metavar="N", help="override sample sizes; repeatable")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="master seed; falls back to $LQE_SEED, then 0")
    p_sim.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: serial)")
    p_sim.add_argument("--format", choices=("table", "json"), default="table",
                       help="stdout rendering (default table)")
    p_sim.add_argument("--output", default=None, metavar="PATH",
                       help="also write the JSON report to PATH")

    p_diag = sub.add_parser(
        "diagnose", help="log-average convergence diagnostic",
        description="Kolmogorov distance of the log-averaged scaled partial "
                    "sums of standard normal draws to the normal limit.")
    p_diag.add_argument("--draws", type=int, default=100_000,
                        help="number of draws (default 100000)")
    p_diag.add_argument("--seed", type=int, default=None,
                        help="master seed; falls back to $LQE_SEED, then 0")
    p_diag.add_argument("--format", choices=("table", "json"), default="table",
                        help="output rendering (default table)")

    return parser


def _resolve_seed(seed_arg):
    if seed_arg is not None:
        return int(seed_arg)
    env = os.environ.get("LQE_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise DataError(f"LQE_SEED must be an integer, got {env!r}")


def load_csv(path, burn_in):
    """Parse a CSV file into a CSampleDataset.

    First row is a header naming the samples; every later row is one
    joint observation. Malformed content raises DataError citing the
    1-based line number.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty")
        if len(header) < 2:
            raise DataError(f"{path}: line 1: need at least 2 columns, "
                            f"got {len(header)}")
        c = len(header)
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != c:
                raise DataError(f"{path}: line {line_no}: expected {c} fields, "
                                f"got {len(row)}")
            parsed = []
            for name, cell in zip(header, row):
                try:
                    value = float(cell)
                except ValueError:
                    raise DataError(f"{path}: line {line_no}: non-numeric value "
                                    f"{cell!r} in column {name!r}")
                if not math.isfinite(value):
                    raise DataError(f"{path}: line {line_no}: non-finite value "
                                    f"{cell!r} in column {name!r}")
                parsed.append(value)
            rows.append(parsed)
    if len(rows) < burn_in + 2:
        raise DataError(f"{path}: need at least {burn_in + 2} data rows for "
                        f"burn-in {burn_in}, got {len(rows)}")
    return header, CSampleDataset(np.asarray(rows, dtype=float))


def _cmd_test(args):
    alpha = check_alpha(args.alpha)
    seed = _resolve_seed(args.seed)
    _, dataset = load_csv(args.csv_path, args.burn_in)
    report = lqe_test(dataset, alpha=alpha, permutations=args.permutations,
                      burn_in=args.burn_in, seed=seed, dependent=args.dependent)
    if args.format == "json":
        payload = {
            "statistic": report.statistic_value,
            "critical_value": report.quantile.averaged,
            "alpha": report.alpha,
            "reject": report.reject,
            "interval": list(report.interval),
            "permutations": report.permutations,
            "burn_in": report.burn_in,
            "seed": report.seed,
            "dependent": args.dependent,
        }
        print(json.dumps(payload, indent=2))
    else:
        decision = "reject" if report.reject else "fail to reject"
        print(f"statistic:       {report.statistic_value:.5f}")
        print(f"critical value:  {report.quantile.averaged:.5f} "
              f"(averaged {1 - alpha:g} log-quantile, "
              f"{report.permutations} reorderings)")
        print(f"decision:        {decision} at level {alpha:g}")
        print(f"interval:        [{report.interval[0]:.5f}, "
              f"{report.interval[1]:.5f}]")
    return EXIT_REJECT if report.reject else EXIT_OK


def _cmd_quantile(args):
    alphas = args.alphas if args.alphas else [0.99, 0.95, 0.90]
    alphas = [check_alpha(a) for a in alphas]
    seed = _resolve_seed(args.seed)
    _, dataset = load_csv(args.csv_path, args.burn_in)
    mode = "joint_rows" if args.dependent else "per_sample"
    per = _per_permutation_quantiles(dataset.values, scaled_kw_trace, alphas,
                                     args.permutations, args.burn_in, seed, mode)
    quantiles = [
        LqeQuantile(alpha=a, per_permutation=per[i], averaged=float(per[i].mean()))
        for i, a in enumerate(alphas)
    ]
    if args.format == "json":
        payload = [
            {
                "alpha": q.alpha,
                "averaged": q.averaged,
                "per_permutation": [float(v) for v in q.per_permutation],
            }
            for q in quantiles
        ]
        print(json.dumps(payload, indent=2))
    else:
        print(f"{'alpha':>8}{'averaged':>12}{'min':>12}{'max':>12}")
        for q in quantiles:
            print(f"{q.alpha:>8g}{q.averaged:>12.5f}"
                  f"{q.per_permutation.min():>12.5f}"
                  f"{q.per_permutation.max():>12.5f}")
    return EXIT_OK


def _cmd_simulate(args):
    if args.config is not None:
        if args.paper_scale:
            raise UsageError("use either a config file or --paper-scale, not both")
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            raise DataError(f"cannot read {args.config}: {exc.strerror or exc}")
        except (ValueError, TypeError, KeyError) as exc:
            raise DataError(f"{args.config}: {exc}")
    else:
        if args.study is None:
            raise UsageError("either a config file or --study is required")
        maker = full_scale_config if args.paper_scale else desk_config
        cfg = maker(args.study, seed=_resolve_seed(args.seed), threads=args.threads)
    overrides = {}
    # an explicit --seed also overrides a config file's seed
    if args.seed is not None:
        overrides["seed"] = int(args.seed)
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.replications is not None:
        overrides["replications"] = args.replications
    if args.permutations is not None:
        overrides["permutations"] = args.permutations
    if args.burn_in is not None:
        overrides["burn_in"] = args.burn_in
    if args.alphas:
        overrides["alphas"] = tuple(args.alphas)
    if args.n_values:
        overrides["n_values"] = tuple(args.n_values)
    if overrides:
        try:
            cfg = dataclasses.replace(cfg, **overrides)
        except (ValueError, TypeError) as exc:
            raise UsageError(str(exc))
    report = run_study(cfg)
    text = report.to_json()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    if args.format == "json":
        print(text)
    else:
        print(render_table(report), end="")
    return EXIT_OK


def _cmd_diagnose(args):
    if args.draws < 1:
        raise UsageError(f"--draws must be >= 1, got {args.draws}")
    seed = _resolve_seed(args.seed)
    rng = substream(seed, DIAGNOSTIC_STREAM)
    sample = rng.standard_normal(args.draws)
    distance = asclt_diagnostic(sample)
    if args.format == "json":
        print(json.dumps({"draws": args.draws, "seed": seed,
                          "distance": distance}, indent=2))
    else:
        print(f"Kolmogorov distance of the log-averaged scaled partial sums "
              f"to the normal limit ({args.draws} draws): {distance:.5f}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("lqrank: error: a command is required", file=sys.stderr)
        return EXIT_USAGE
    handler = {
        "test": _cmd_test,
        "quantile": _cmd_quantile,
        "simulate": _cmd_simulate,
        "diagnose": _cmd_diagnose,
    }[args.command]
    try:
        return handler(args)
    except UsageError as exc:
        print(f"lqrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"lqrank: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # semantic flag problems (bad alpha, bad burn-in) surface here
        print(f"lqrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
