"""Command-line front end.

Subcommands: test, segment, simulate, quantile, study, logreturns,
rollvol, tables. Every run is a pure function of its input files, flags
and seed; rerunning reproduces byte-identical output. Exit codes:
0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import limits
from .csvio import CsvPanelFormat, ingest_csv, write_panel_csv
from .cusum import TestConfig, run_test
from .errors import (
    CovbreakError,
    DataError,
    NotPositiveDefiniteError,
    SimulationOverflowError,
    SpecValidationError,
    UsageError,
)
from .generators import break_panel, simulate
from .model_files import load_model_spec, load_study_design
from .reports import emit_report
from .segmentation import SegmentConfig, binary_segment
from .study import run_study
from .transforms import center_log_returns, rolling_vol

TABLE_VDIMS = (10, 15, 20, 50, 100, 200, 500)
TABLE_LEVELS = (0.90, 0.95, 0.99)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        raise UsageError(message)


def _csv_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--header", action="store_true", help="first row is a header")
    p.add_argument("--labels", action="store_true", help="first column holds row labels")
    p.add_argument("--delimiter", default=",", help="field delimiter (default ',')")


def _read_panel(args) -> "TimeSeriesPanel":
    fmt = CsvPanelFormat(delimiter=args.delimiter, header=args.header, label_column=args.labels)
    return ingest_csv(args.input, fmt)


def _window(value: str):
    if value == "auto":
        return "auto"
    try:
        return int(value)
    except ValueError:
        raise UsageError(f"--bartlett must be 'auto' or an integer, got {value!r}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> _Parser:
    parser = _Parser(prog="covbreak", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="single break test on a CSV panel")
    p.add_argument("--input", required=True)
    _csv_flags(p)
    p.add_argument("--stat", choices=("omega", "lambda"), default="omega")
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--center", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--delta", type=float, default=None, help="fractional transform exponent")
    p.add_argument("--bartlett", default="auto", help="'auto' (log10 rule) or a fixed lag count")
    p.add_argument("--ridge", type=float, default=None)
    p.add_argument("--seed", type=int, default=limits.DEFAULT_SEED, help="Monte Carlo seed (lambda only)")
    p.add_argument("--reps", type=int, default=100_000, help="Monte Carlo size (lambda only)")
    p.add_argument("--grid", type=int, default=4097, help="Monte Carlo grid (lambda only)")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--out", default=None)

    p = sub.add_parser("segment", help="binary segmentation for multiple breaks")
    p.add_argument("--input", required=True)
    _csv_flags(p)
    p.add_argument("--stat", choices=("omega", "lambda"), default="omega")
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--min-len", type=int, default=30)
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("--center", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--bartlett", default="auto")
    p.add_argument("--ridge", type=float, default=None)
    p.add_argument("--seed", type=int, default=limits.DEFAULT_SEED)
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--grid", type=int, default=4097)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--out", default=None)

    p = sub.add_parser("simulate", help="simulate a model to CSV")
    p.add_argument("--model", required=True, help="model TOML file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--burnin", type=int, default=500)
    p.add_argument("--seed", type=int, default=limits.DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--post", default=None, help="post-change model TOML (single break)")
    p.add_argument("--theta", type=float, default=0.5, help="break fraction with --post")
    p.add_argument("--allow-nonstationary", action="store_true")

    p = sub.add_parser("quantile", help="critical values of the limit laws")
    p.add_argument("--stat", choices=("omega", "lambda"), required=True)
    p.add_argument("--vdim", type=int, required=True)
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--standardized", action="store_true")
    p.add_argument("--seed", type=int, default=limits.DEFAULT_SEED)
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--grid", type=int, default=4097)

    p = sub.add_parser("study", help="Monte Carlo study from a design TOML")
    p.add_argument("--design", required=True)
    p.add_argument("--reps", type=int, default=None, help="override design replications")
    p.add_argument("--seed", type=int, default=None, help="override design master seed")
    p.add_argument("--format", choices=("text", "json", "csv"), default="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--progress", action="store_true")

    p = sub.add_parser("logreturns", help="column-centered log returns of a price panel")
    p.add_argument("--prices", required=True)
    _csv_flags(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("rollvol", help="rolling (cross-)volatility, long format")
    p.add_argument("--input", required=True)
    _csv_flags(p)
    p.add_argument("--window", type=int, default=100)
    p.add_argument("--pairs", default="all", help="'all' or 'K,L' (1-based coordinates)")
    p.add_argument("--out", default=None)

    p = sub.add_parser("tables", help="regenerate the critical-value reference tables")
    p.add_argument("--stat", choices=("omega", "lambda", "both"), default="both")
    p.add_argument("--seed", type=int, default=limits.DEFAULT_SEED)
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--grid", type=int, default=4097)
    p.add_argument("--out", default=None)

    return parser


def _cmd_test(args) -> None:
    panel = _read_panel(args)
    from .linalg import vech_dim

    law = None
    if args.stat == "lambda":
        law = limits.LambdaLaw(vech_dim(panel.d), args.grid, args.reps, args.seed)
    config = TestConfig(
        statistic=args.stat,
        level=args.level,
        center=args.center,
        window=_window(args.bartlett),
        ridge=args.ridge,
        transform_delta=args.delta,
        lambda_law=law,
    )
    report = run_test(panel, config)
    _emit(emit_report(report, args.format), args.out)


def _cmd_segment(args) -> None:
    panel = _read_panel(args)
    from .linalg import vech_dim

    law = None
    if args.stat == "lambda":
        law = limits.LambdaLaw(vech_dim(panel.d), args.grid, args.reps, args.seed)
    config = SegmentConfig(
        test=TestConfig(
            statistic=args.stat,
            level=args.level,
            center=args.center,
            window=_window(args.bartlett),
            ridge=args.ridge,
            transform_delta=args.delta,
            lambda_law=law,
        ),
        min_len=args.min_len,
        max_depth=args.max_depth,
    )
    report = binary_segment(panel, config)
    _emit(emit_report(report, args.format, labels=panel.labels), args.out)


def _cmd_simulate(args) -> None:
    spec = load_model_spec(args.model)
    if args.post is not None:
        post = load_model_spec(args.post)
        panel = break_panel(
            spec, post, args.n, args.theta, args.burnin, args.seed,
            allow_nonstationary=args.allow_nonstationary,
        )
    else:
        panel = simulate(
            spec, args.n, args.burnin, args.seed,
            allow_nonstationary=args.allow_nonstationary,
        )
    write_panel_csv(panel, args.out, header=args.header)


def _cmd_quantile(args) -> None:
    if args.vdim < 1:
        raise UsageError("--vdim must be >= 1")
    if not 0.0 < args.level < 1.0:
        raise UsageError("--level must lie in (0, 1)")
    if args.stat == "omega":
        raw = limits.omega_quantile(args.vdim, args.level)
    else:
        raw = limits.lambda_quantile(
            limits.LambdaLaw(args.vdim, args.grid, args.reps, args.seed), args.level
        )
    value = limits.standardize(args.stat, args.vdim, raw) if args.standardized else raw
    sys.stdout.write(f"{value:.10g}\n")


def _cmd_study(args) -> None:
    design = load_study_design(args.design)
    if args.reps is not None:
        design.replications = args.reps
    if args.seed is not None:
        design.master_seed = args.seed
    result = run_study(design, progress=args.progress)
    _emit(emit_report(result, args.format), args.out)


def _cmd_logreturns(args) -> None:
    fmt = CsvPanelFormat(delimiter=args.delimiter, header=args.header, label_column=args.labels)
    prices = ingest_csv(args.prices, fmt)
    panel = center_log_returns(prices)
    out = args.out
    if out:
        write_panel_csv(panel, out, header=False)
    else:
        import io

        buf = io.StringIO()
        for i in range(panel.n):
            row = ",".join(format(x, ".17g") for x in panel.values[i])
            if panel.labels is not None:
                row = f"{panel.labels[i]},{row}"
            buf.write(row + "\n")
        sys.stdout.write(buf.getvalue())


def _cmd_rollvol(args) -> None:
    panel = _read_panel(args)
    series = rolling_vol(panel, args.window)
    if args.pairs == "all":
        wanted = None
    else:
        try:
            k_s, l_s = args.pairs.split(",")
            pair = (max(int(k_s), int(l_s)) - 1, min(int(k_s), int(l_s)) - 1)
        except ValueError:
            raise UsageError(f"--pairs must be 'all' or 'K,L', got {args.pairs!r}") from None
        if pair not in series.pairs:
            raise UsageError(f"pair {args.pairs} out of range for d={panel.d}")
        wanted = series.pairs.index(pair)
    lines = ["j,k,l,value"]
    for i in range(series.values.shape[0]):
        j = series.start + i + 1  # 1-based row index of the window end
        for p, (k, l) in enumerate(series.pairs):
            if wanted is not None and p != wanted:
                continue
            lines.append(f"{j},{k + 1},{l + 1},{float(series.values[i, p])!r}")
    _emit("\n".join(lines) + "\n", args.out)


def _cmd_tables(args) -> None:
    lines = []
    if args.stat in ("omega", "both"):
        lines.append("statistic=omega (standardized quantiles, coverage of the normal approximation)")
        lines.append("vdim," + ",".join(f"q{p:g},cov{p:g}" for p in TABLE_LEVELS))
        for vdim in TABLE_VDIMS:
            cells = []
            for p in TABLE_LEVELS:
                q = limits.standardize("omega", vdim, limits.omega_quantile(vdim, p))
                cov = limits.normal_coverage(vdim, p, "omega")
                cells.append(f"{q:.2f},{cov:.2f}")
            lines.append(f"{vdim}," + ",".join(cells))
    if args.stat in ("lambda", "both"):
        lines.append("statistic=lambda (standardized quantiles, coverage of the normal approximation)")
        lines.append("vdim," + ",".join(f"q{p:g},cov{p:g}" for p in TABLE_LEVELS))
        for vdim in TABLE_VDIMS:
            law = limits.LambdaLaw(vdim, args.grid, args.reps, args.seed)
            cells = []
            for p in TABLE_LEVELS:
                q = limits.standardize("lambda", vdim, limits.lambda_quantile(law, p))
                cov = limits.normal_coverage(vdim, p, "lambda", law)
                cells.append(f"{q:.2f},{cov:.2f}")
            lines.append(f"{vdim}," + ",".join(cells))
    _emit("\n".join(lines) + "\n", args.out)


_COMMANDS = {
    "test": _cmd_test,
    "segment": _cmd_segment,
    "simulate": _cmd_simulate,
    "quantile": _cmd_quantile,
    "study": _cmd_study,
    "logreturns": _cmd_logreturns,
    "rollvol": _cmd_rollvol,
    "tables": _cmd_tables,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (
        NotPositiveDefiniteError,
        SimulationOverflowError,
        SpecValidationError,
        ArithmeticError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except CovbreakError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
