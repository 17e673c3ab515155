"""Command-line surface.

Subcommands: score, decompose, rolling, network, generate, bench.
Data goes to --output (default stdout); diagnostics go to stderr.
Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from contextlib import contextmanager
from typing import Optional, Union

from .cascades import BuildOptions, build_cascades
from .errors import DataError
from .ingest import ClusterTsvFormat, CsvEventFormat, IngestStats, read_events, write_events
from .network import DEFAULT_GUARD_SIZE, export_network, write_edges_csv
from .online import (
    assign_cascades,
    partition_intervals,
    rolling_scores,
    topk_consistency,
    write_consistency_csv,
)
from .scoring import ScoringConfig, decompose, score_set, write_score_csv
from . import bench as bench_mod

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.5
ALPHA_ENV_VAR = "CASCORE_ALPHA"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _column_ref(text: str) -> Union[int, str]:
    try:
        return int(text)
    except ValueError:
        return text


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(f"must be positive, got {value}")
    return value


def _span(text: str) -> tuple[float, float]:
    low, _, high = text.partition(",")
    return (float(low), float(high))


def _size_dist(text: str) -> bench_mod.SizeDistribution:
    kind, _, rest = text.partition(":")
    parts = [p for p in rest.split(",") if p]
    if kind == "fixed" and len(parts) == 1:
        return bench_mod.FixedSize(int(parts[0]))
    if kind == "uniform" and len(parts) == 2:
        return bench_mod.UniformSize(int(parts[0]), int(parts[1]))
    if kind == "powerlaw" and len(parts) in (2, 3):
        minimum = int(parts[2]) if len(parts) == 3 else 1
        return bench_mod.PowerLawSize(float(parts[0]), int(parts[1]), minimum)
    raise ValueError(
        f"bad size distribution {text!r}; use fixed:N, uniform:LO,HI "
        f"or powerlaw:EXP,CAP[,MIN]"
    )


def _default_alpha() -> float:
    raw = os.environ.get(ALPHA_ENV_VAR)
    if raw is None:
        return DEFAULT_ALPHA
    try:
        return float(raw)
    except ValueError:
        logger.warning("ignoring bad %s=%r", ALPHA_ENV_VAR, raw)
        return DEFAULT_ALPHA


@contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            yield handle


def _event_format(args) -> Union[CsvEventFormat, ClusterTsvFormat]:
    if args.format == "cluster-tsv":
        return ClusterTsvFormat()
    return CsvEventFormat(
        delimiter=args.delimiter,
        cascade_col=args.cascade_col,
        participant_col=args.participant_col,
        time_col=args.time_col,
        viewed_col=args.viewed_col,
        header=not args.no_header,
    )


def _scoring_config(args) -> ScoringConfig:
    return ScoringConfig(alpha=args.alpha, use_view_filter=args.use_view_column)


def _build_options(args) -> BuildOptions:
    return BuildOptions(min_size=args.min_size, max_size=args.max_size)


def _read_event_list(args) -> list:
    stats = IngestStats()
    events = list(
        read_events(args.input, _event_format(args), strict=args.strict, stats=stats)
    )
    if stats.skipped:
        print(
            f"skipped {stats.skipped} malformed line(s) out of {stats.lines}",
            file=sys.stderr,
        )
    return events


def _write_terms_csv(terms, handle) -> None:
    writer = csv.writer(handle)
    writer.writerow(
        ["participant_id", "cascade_id", "downstream_count", "viewed",
         "inverse_percentile", "value"]
    )
    for term in terms:
        writer.writerow(
            [
                term.participant_id,
                term.cascade_id,
                term.downstream_count,
                1 if term.viewed else 0,
                f"{term.inverse_percentile:.6f}",
                f"{term.value:.6f}",
            ]
        )


def cmd_score(args) -> int:
    cascades = build_cascades(_read_event_list(args), _build_options(args))
    retain = args.decompose_store is not None
    table = score_set(cascades, _scoring_config(args), retain_terms=retain)
    with _open_out(args.output) as handle:
        write_score_csv(table, handle)
    if retain:
        everything = []
        for pid in table.participants():
            everything.extend(table.terms_for(pid))
        everything.sort(key=lambda t: (t.participant_id, -t.value, t.cascade_id))
        with _open_out(args.decompose_store) as handle:
            _write_terms_csv(everything, handle)
    if args.figure:
        from . import plots

        plots.save_score_figure(table, args.figure)
    return 0


def cmd_decompose(args) -> int:
    cascades = build_cascades(_read_event_list(args), _build_options(args))
    table = score_set(cascades, _scoring_config(args), retain_terms=True)
    terms = decompose(table, args.participant, args.top_n)
    with _open_out(args.output) as handle:
        _write_terms_csv(terms, handle)
    return 0


def cmd_rolling(args) -> int:
    events = _read_event_list(args)
    partition = partition_intervals(events, args.intervals)
    cascades = build_cascades(events, _build_options(args))
    by_interval = assign_cascades(partition, cascades)
    windows = rolling_scores(partition, by_interval, args.window, _scoring_config(args))
    series = topk_consistency(windows, args.top_k, window_end_offset=args.window - 1)
    with _open_out(args.output) as handle:
        write_consistency_csv(series, handle)
    if args.figure:
        from . import plots

        plots.save_consistency_figure(series, args.figure)
    return 0


def cmd_network(args) -> int:
    cascades = build_cascades(_read_event_list(args), _build_options(args))
    edges = export_network(
        cascades,
        _scoring_config(args),
        mode=args.mode,
        max_fanout=args.max_fanout,
        guard_size=args.guard_size,
        allow_quadratic=args.allow_quadratic,
    )
    with _open_out(args.output) as handle:
        write_edges_csv(edges, handle)
    return 0


def _synthetic_spec(args) -> bench_mod.SyntheticSpec:
    return bench_mod.SyntheticSpec(
        pool_size=args.pool,
        n_cascades=args.cascades,
        n_events=args.events,
        sizes=args.size_dist,
        time_span=args.span,
        seed=args.seed,
        tie_fraction=args.tie_fraction,
    )


def cmd_generate(args) -> int:
    spec = _synthetic_spec(args)
    with _open_out(args.output) as handle:
        count = write_events(handle, bench_mod.generate(spec))
    print(f"wrote {count} events", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    spec = _synthetic_spec(args)
    report = bench_mod.run_bench(spec, _scoring_config(args), args.repetitions)
    with _open_out(args.output) as handle:
        bench_mod.write_bench_csv(report, handle)
    print(bench_mod.format_bench_text(report), file=sys.stderr)
    if args.figure:
        from . import plots

        plots.save_bench_figure(report, args.figure)
    return 0


def build_parser() -> _Parser:
    io_parent = _Parser(add_help=False)
    io_parent.add_argument("input", help="event file to read")
    io_parent.add_argument(
        "--format", choices=["csv", "cluster-tsv"], default="csv",
        help="input shape (default csv)",
    )
    io_parent.add_argument("--delimiter", default=",", help="csv delimiter")
    io_parent.add_argument("--no-header", action="store_true",
                           help="csv input has no header row")
    io_parent.add_argument("--cascade-col", type=_column_ref, default=0, metavar="COL")
    io_parent.add_argument("--participant-col", type=_column_ref, default=1, metavar="COL")
    io_parent.add_argument("--time-col", type=_column_ref, default=2, metavar="COL")
    io_parent.add_argument("--viewed-col", type=_column_ref, default=None, metavar="COL")
    io_parent.add_argument(
        "--strict", action="store_true",
        help="abort on the first malformed line instead of skipping",
    )
    io_parent.add_argument("--min-size", type=_positive_int, default=1,
                           help="drop cascades smaller than this")
    io_parent.add_argument("--max-size", type=_positive_int, default=None,
                           help="drop cascades larger than this")

    scoring_parent = _Parser(add_help=False)
    scoring_parent.add_argument(
        "--alpha", type=float, default=_default_alpha(),
        help=f"positional decay exponent (default 0.5, or ${ALPHA_ENV_VAR})",
    )
    scoring_parent.add_argument(
        "--use-view-column", action="store_true",
        help="multiply in the parsed viewed flag instead of forcing it to 1",
    )

    out_parent = _Parser(add_help=False)
    out_parent.add_argument("--output", default="-", help="output file (default stdout)")

    gen_parent = _Parser(add_help=False)
    stop = gen_parent.add_mutually_exclusive_group(required=True)
    stop.add_argument("--cascades", type=_positive_int, default=None,
                      help="number of cascades to generate")
    stop.add_argument("--events", type=_positive_int, default=None,
                      help="generate until this many events")
    gen_parent.add_argument("--pool", type=_positive_int, default=50_000,
                            help="participant pool size (default 50000)")
    gen_parent.add_argument(
        "--size-dist", type=_size_dist, default=bench_mod.PowerLawSize(),
        metavar="SPEC", help="fixed:N, uniform:LO,HI or powerlaw:EXP,CAP[,MIN]",
    )
    gen_parent.add_argument("--span", type=_span, default=(0.0, 1000.0),
                            metavar="LO,HI", help="timestamp span (default 0,1000)")
    gen_parent.add_argument("--seed", type=int, default=0)
    gen_parent.add_argument("--tie-fraction", type=float, default=0.0,
                            help="probability of repeating the previous timestamp")

    parser = _Parser(prog="cascore", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = commands.add_parser(
        "score", parents=[io_parent, scoring_parent, out_parent],
        help="rank participants by early-adopter influence",
    )
    p.add_argument("--decompose-store", metavar="PATH", default=None,
                   help="also write every contribution term to PATH")
    p.add_argument("--figure", metavar="PATH", default=None,
                   help="render a top-participant chart to PATH")
    p.set_defaults(func=cmd_score)

    p = commands.add_parser(
        "decompose", parents=[io_parent, scoring_parent, out_parent],
        help="largest contribution terms for one participant",
    )
    p.add_argument("--participant", required=True, help="participant id to explain")
    p.add_argument("--top-n", type=_positive_int, default=10)
    p.set_defaults(func=cmd_decompose)

    p = commands.add_parser(
        "rolling", parents=[io_parent, scoring_parent, out_parent],
        help="rolling-window top-k ranking consistency",
    )
    p.add_argument("--intervals", type=_positive_int, default=20)
    p.add_argument("--window", type=_positive_int, default=3)
    p.add_argument("--top-k", type=_positive_int, default=20)
    p.add_argument("--figure", metavar="PATH", default=None,
                   help="render the consistency series to PATH")
    p.set_defaults(func=cmd_rolling)

    p = commands.add_parser(
        "network", parents=[io_parent, scoring_parent, out_parent],
        help="export the inferred influence network as an edge list",
    )
    p.add_argument("--mode", choices=["successor", "downstream"], default="successor")
    p.add_argument("--max-fanout", type=_positive_int, default=None,
                   help="cap downstream targets per source")
    p.add_argument("--guard-size", type=_positive_int, default=DEFAULT_GUARD_SIZE)
    p.add_argument("--allow-quadratic", action="store_true",
                   help="permit uncapped downstream mode on huge cascades")
    p.set_defaults(func=cmd_network)

    p = commands.add_parser(
        "generate", parents=[gen_parent, out_parent],
        help="emit a deterministic synthetic event set",
    )
    p.set_defaults(func=cmd_generate)

    p = commands.add_parser(
        "bench", parents=[gen_parent, scoring_parent, out_parent],
        help="time the parse/build/score pipeline on synthetic data",
    )
    p.add_argument("--repetitions", type=_positive_int, default=7)
    p.add_argument("--figure", metavar="PATH", default=None,
                   help="render stage timings to PATH")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"cascore: data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"cascore: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cascore: i/o error: {exc}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
