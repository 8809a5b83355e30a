"""
Command-line interface.

    net-homophily analyze NODES EDGES [options]     z-scores, bounds and charts
    net-homophily validate NODES EDGES [options]    closed forms against the oracle
    net-homophily benchmark [options]               timing on synthetic graphs

Exit status is 0 on success, 1 when validation finds a mismatch, 2 on
invalid input and 3 when a required chart could not be written.
"""

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence, TextIO

import numpy as np

from . import __version__
from .benchmark import GeneratorParams, run_benchmark, write_benchmark_csv
from .ingest import (
    DEFAULT_SUFFIX_PATTERN,
    PreprocessConfig,
    load_colored_graph,
    open_text,
    parse_alias_config,
    parse_bucket_config,
)
from .oracle import ComparisonRow, compare_moments, enumerate_moments, sample_moments
from .plots import HeatmapSpec, HeatmapSpecs, HomophilyPlotter
from .report import ReportWriter
from .stats import HomophilyCalculator, MomentTable, StatsConfig, class_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INPUT = 2
EXIT_OUTPUT = 3

REQUIRED_CHARTS = ("heatmap", "z0")


def _alpha_list(text: str) -> List[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not values or any(not 0.0 < value <= 1.0 for value in values):
        raise argparse.ArgumentTypeError(f"alpha values must lie in (0, 1], got {text!r}")
    return values


def _add_input_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("node_file", type=Path, help="node file: <label>\\t<class> per line")
    parser.add_argument("edge_file", type=Path, help="edge file: <label>\\t<label>[\\t<weight>]")
    group = parser.add_argument_group("preprocessing")
    group.add_argument("--cutoff", type=int, help="keep edges with weight >= CUTOFF (0-999)")
    group.add_argument(
        "--merge-suffix",
        nargs="?",
        const=DEFAULT_SUFFIX_PATTERN,
        metavar="PATTERN",
        help=f"merge labels differing by a suffix regex (default {DEFAULT_SUFFIX_PATTERN!r})",
    )
    group.add_argument("--conflict-class", default="X", help="class of merged nodes whose classes differ")
    group.add_argument("--mutual-only", action="store_true", help="keep edges listed in both directions")
    group.add_argument("--bucket-config", type=Path, help="bucket a numeric node attribute into classes")
    group.add_argument("--alias-config", type=Path, help="class alias map, 'class,replacement' lines")
    group.add_argument("--keep-isolated", action="store_true", help="keep nodes without edges")
    parser.add_argument("--threads", type=int, default=1, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser of the ``net-homophily`` command."""
    parser = argparse.ArgumentParser(
        prog="net-homophily",
        description="Homophily z-scores of node-colored networks under random colouring.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more log output (-vv for debug)")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="compute z-scores, bounds and charts")
    _add_input_arguments(analyze)
    analyze.add_argument(
        "--clamp", nargs=2, type=float, metavar=("LO", "HI"), help="heat-map clamp interval (default -10 60)"
    )
    analyze.add_argument("--cantelli", action="store_true", help="one-sided Cantelli bounds")
    analyze.add_argument(
        "--alpha", type=_alpha_list, default=[0.05], help="comma-separated significance levels"
    )
    analyze.add_argument(
        "--exclude-class", action="append", default=[], metavar="CLASS",
        help="leave a class out of the z-score summary (repeatable)",
    )
    analyze.add_argument("--out", type=Path, default=Path("."), help="output directory")

    validate = commands.add_parser("validate", help="compare closed forms with the null-model oracle")
    _add_input_arguments(validate)
    validate.add_argument("--mode", choices=("exact", "sample"), default="exact")
    validate.add_argument("--samples", type=int, default=100_000, help="colourings in sample mode")
    validate.add_argument("--seed", type=int, default=0)
    validate.add_argument("--tolerance", type=float, default=1e-9, help="exact-mode relative tolerance")
    validate.add_argument("--inject-error", type=float, default=0.0, metavar="REL", help=argparse.SUPPRESS)
    validate.add_argument("--out", type=Path, help="also write validation.csv here")

    bench = commands.add_parser("benchmark", help="time the pipelines on random graphs")
    bench.add_argument("--nodes", type=int, default=1_000_000)
    bench.add_argument("--edges", type=int, nargs="+", default=[8_000_000])
    bench.add_argument("--colors", type=int, default=5)
    bench.add_argument("--repetitions", type=int, default=3)
    bench.add_argument("--isolated", action="store_true", help="also time isolated-node variances")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", type=Path, default=Path("."), help="output directory")
    return parser


def _preprocess_config(args: argparse.Namespace) -> PreprocessConfig:
    aliases = {}
    if args.alias_config is not None:
        with open_text(_existing(args.alias_config)) as f:
            aliases = parse_alias_config(f)
    bucket_rule = None
    if args.bucket_config is not None:
        with open_text(_existing(args.bucket_config)) as f:
            bucket_rule = parse_bucket_config(f)
    return PreprocessConfig(
        cutoff=args.cutoff,
        merge_suffix=args.merge_suffix,
        conflict_class=args.conflict_class,
        mutual_only=args.mutual_only,
        aliases=aliases,
        bucket_rule=bucket_rule,
        keep_isolated=args.keep_isolated,
    )


def _existing(path: Path) -> Path:
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    return path


def run_analyze(args: argparse.Namespace, stdout: TextIO) -> int:
    graph = load_colored_graph(args.node_file, args.edge_file, _preprocess_config(args))
    calculator = HomophilyCalculator(
        StatsConfig(cantelli=args.cantelli, alphas=tuple(args.alpha), threads=args.threads)
    )
    report = calculator.analyze(graph)
    unknown = sorted(set(args.exclude_class).difference(report.color_labels))
    if unknown:
        raise ValueError(f"unknown classes to exclude: {', '.join(unknown)}")

    spec = HeatmapSpecs.protein_interaction()
    if args.clamp is not None:
        spec = HeatmapSpec(clamp=(args.clamp[0], args.clamp[1]))

    out: Path = args.out
    writer = ReportWriter()
    writer.save_json(report, out / "report.json")
    writer.save_csv(report, out / "matrices.csv")
    charts = HomophilyPlotter(spec).save_all(report, out)
    writer.save_markdown(
        report,
        out / "report.md",
        class_rows=class_table(graph, report.counts),
        exclude=args.exclude_class,
        figures=[path.name for path in charts.values()],
    )

    stdout.write(
        f"n={report.n} m={report.m} s={report.s} density={100 * report.density:.4f}% "
        f"synthetic_index={report.synthetic_index:.4f}\n"
    )
    for level in report.levels:
        stdout.write(
            f"alpha={level.alpha:g}: q(diagonal)={level.diagonal.q} "
            f"q(off-diagonal)={level.off_diagonal.q}\n"
        )
    missing = [name for name in REQUIRED_CHARTS if name not in charts]
    if missing:
        print(f"net-homophily: error: charts not written: {', '.join(missing)}", file=sys.stderr)
        return EXIT_OUTPUT
    return EXIT_OK


def _perturbed(moments: MomentTable, relative: float) -> MomentTable:
    factor = 1.0 + relative
    return replace(
        moments,
        mean_edges=moments.mean_edges * factor,
        var_edges=moments.var_edges * factor,
        mean_isolated=moments.mean_isolated * factor,
        var_isolated=moments.var_isolated * factor,
    )


def _write_comparison(rows: Sequence[ComparisonRow], stream: TextIO) -> None:
    header = f"{'statistic':<24} {'moment':<9} {'closed form':>16} {'oracle':>16} {'rel. error':>11} {'std. err.':>11}  ok"
    stream.write(header + "\n")
    for row in rows:
        se = "" if row.standard_error is None else f"{row.standard_error:.3e}"
        stream.write(
            f"{row.statistic:<24} {row.moment:<9} {row.closed_form:>16.10g} {row.oracle:>16.10g} "
            f"{row.relative_error:>11.3e} {se:>11}  {'yes' if row.within else 'NO'}\n"
        )


def _save_comparison(rows: Sequence[ComparisonRow], output_path: Path) -> None:
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["statistic", "moment", "closed_form", "oracle", "relative_error", "standard_error", "within"])
        for row in rows:
            writer.writerow([
                row.statistic, row.moment, repr(row.closed_form), repr(row.oracle),
                repr(row.relative_error), "" if row.standard_error is None else repr(row.standard_error),
                row.within,
            ])


def run_validate(args: argparse.Namespace, stdout: TextIO) -> int:
    graph = load_colored_graph(args.node_file, args.edge_file, _preprocess_config(args))
    graph.profile().require_positive()
    moments = HomophilyCalculator(StatsConfig(threads=args.threads)).moments(graph)
    if args.inject_error:
        moments = _perturbed(moments, args.inject_error)

    if args.mode == "exact":
        summary = enumerate_moments(graph)
    else:
        summary = sample_moments(graph, samples=args.samples, seed=args.seed, threads=args.threads)
    rows = compare_moments(moments, summary, graph.color_labels, tolerance=args.tolerance)
    _write_comparison(rows, stdout)
    if args.out is not None:
        _save_comparison(rows, args.out / "validation.csv")

    within = sum(row.within for row in rows)
    if args.mode == "exact":
        passed = within == len(rows)
    else:
        passed = within >= 0.99 * len(rows)
    stdout.write(f"{within}/{len(rows)} statistics within tolerance\n")
    return EXIT_OK if passed else EXIT_MISMATCH


def run_benchmark_command(args: argparse.Namespace, stdout: TextIO) -> int:
    params = [
        GeneratorParams(n=args.nodes, m=edges, s=args.colors, seed=args.seed) for edges in args.edges
    ]
    rows = run_benchmark(params, repetitions=args.repetitions, isolated=args.isolated)
    write_benchmark_csv(rows, args.out / "benchmark.csv")
    for row in rows:
        line = f"n={row.n} m={row.m}: edge z-scores {row.edge_seconds:.4f}s ({row.edges_per_second:.3g} edges/s)"
        if row.isolated_seconds is not None:
            line += (
                f", isolated {row.isolated_seconds:.4f}s "
                f"({row.squared_degrees_per_second:.3g} squared degrees/s)"
            )
        stdout.write(line + "\n")
    if len(rows) > 1:
        ratios = np.array([row.edge_seconds for row in rows[1:]]) / max(rows[0].edge_seconds, 1e-12)
        stdout.write("edge time relative to first: " + ", ".join(f"{r:.2f}" for r in ratios) + "\n")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    """Entry point of the ``net-homophily`` command; returns the exit status."""
    args = build_parser().parse_args(argv)
    stdout = stdout or sys.stdout
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    commands = {
        "analyze": run_analyze,
        "validate": run_validate,
        "benchmark": run_benchmark_command,
    }
    try:
        return commands[args.command](args, stdout)
    except (ValueError, FileNotFoundError, ArithmeticError) as error:
        print(f"net-homophily: error: {error}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
