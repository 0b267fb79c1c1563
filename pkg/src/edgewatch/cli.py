"""Command-line front end.

Subcommands: ``score`` (per-edge anomaly scores, optionally with binary
decisions), ``eval`` (median ROC-AUC over trials, hyperparameter
sweeps), ``synth`` (labeled synthetic streams), ``bench`` (prefix
scaling) and ``aggregate`` (per-tick maxima for case-study timelines).

Exit codes: 0 on success, 2 for usage, parameter and input-format
problems, 1 for runtime failures.  Report-emitting commands render a
figure next to their delimited output unless ``--no-plot`` is given.
The seed falls back to the ``EDGEWATCH_SEED`` environment variable,
then to 42.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import evaluation, stream_io, synth
from .detector import (
    COMBINE_MODES,
    DEFAULT_ALPHA,
    DEFAULT_BUCKETS,
    DEFAULT_ROWS,
    DEFAULT_THETA,
    VARIANTS,
    DetectorConfig,
)
from .engine import score_stream
from .errors import EdgewatchError, OrderingError, ParameterError, ParseError
from .scoring import GuaranteeParams
from .sketch import layout_for_guarantee

_USAGE_ERRORS = (ParameterError, ParseError, OrderingError, FileNotFoundError)


def _default_seed() -> int:
    env = os.environ.get("EDGEWATCH_SEED")
    return int(env) if env else 42


def _add_detector_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--variant", choices=VARIANTS, default="midas")
    parser.add_argument("--rows", type=int, default=None,
                        help=f"hash rows per sketch (default {DEFAULT_ROWS})")
    parser.add_argument("--buckets", type=int, default=None,
                        help=f"buckets per row (default {DEFAULT_BUCKETS})")
    parser.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                        help="decay for live-tick counts at tick boundaries")
    parser.add_argument("--theta", type=float, default=DEFAULT_THETA,
                        help="merge-gating threshold (midas-f)")
    parser.add_argument("--combine", choices=COMBINE_MODES, default="max")
    parser.add_argument("--seed", type=int, default=None,
                        help="hash seed (default: $EDGEWATCH_SEED or 42)")


def _add_input_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("input", help="edge file (source,destination,tick per line)")
    parser.add_argument("--format", choices=stream_io.FORMATS, default="auto")
    parser.add_argument("--tick-divisor", type=int, default=None,
                        help="integer-divide raw timestamps and rebase to tick 1")


def _build_config(args) -> DetectorConfig:
    decide = getattr(args, "decide", False)
    guarantee = None
    rows, buckets = args.rows, args.buckets
    if decide:
        if args.variant != "midas":
            raise ParameterError("--decide is only available for --variant midas")
        guarantee = GuaranteeParams(eps=args.eps, nu=args.nu)
        if rows is None or buckets is None:
            sized = layout_for_guarantee(args.eps, args.nu)
            rows = rows if rows is not None else sized.rows
            buckets = buckets if buckets is not None else sized.buckets
    return DetectorConfig(
        variant=args.variant,
        rows=rows if rows is not None else DEFAULT_ROWS,
        buckets=buckets if buckets is not None else DEFAULT_BUCKETS,
        alpha=args.alpha,
        theta=args.theta,
        combine=args.combine,
        guarantee=guarantee,
    )


def _seed_of(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _figure_target(output: str | None, plot: str | None, no_plot: bool) -> Path | None:
    if no_plot:
        return None
    if plot:
        return Path(plot)
    if output:
        return Path(output).with_suffix(".png")
    return None


def _cmd_score(args) -> int:
    stream = stream_io.load_edges(args.input, fmt=args.format,
                                  tick_divisor=args.tick_divisor)
    cfg = _build_config(args)
    result = score_stream(stream, cfg, seed=_seed_of(args),
                          with_flags=args.decide)
    output = args.output or (args.input + ".scores")
    stream_io.write_scores(result.scores, output, flags=result.flags)
    print(f"scored {stream.edge_count} edges in {result.runtime_seconds:.4f}s "
          f"({result.edges_per_second:,.0f} edges/s) -> {output}")
    return 0


def _cmd_eval(args) -> int:
    if bool(args.sweep) != bool(args.values):
        raise ParameterError("--sweep and --values go together")
    stream = stream_io.load_edges(args.input, fmt=args.format,
                                  tick_divisor=args.tick_divisor)
    labels = stream_io.load_labels(args.labels)
    stream = stream.with_labels(labels)
    cfg = _build_config(args)
    seed = _seed_of(args)
    figure = _figure_target(args.output, args.plot, args.no_plot)

    if args.sweep:
        values = [float(v) for v in args.values.split(",") if v.strip()]
        rows = evaluation.sweep(stream, cfg, args.sweep, values,
                                trials=args.trials, seed=seed)
        print(f"{args.sweep:>12}  {'auc':>8}  {'runtime_s':>10}")
        for row in rows:
            print(f"{row.value:>12g}  {row.auc:>8.4f}  {row.runtime_seconds:>10.4f}")
        report_lines = ["parameter,auc,runtime_seconds"]
        report_lines += [f"{row.value:g},{row.auc:.6f},{row.runtime_seconds:.6f}"
                         for row in rows]
        if args.output:
            Path(args.output).write_text("\n".join(report_lines) + "\n",
                                         encoding="utf-8")
        if figure:
            from . import plots
            plots.save_sweep_figure(rows, args.sweep, figure)
            print(f"figure -> {figure}")
        return 0

    report = evaluation.run_trials(stream, cfg, trials=args.trials, seed=seed)
    print(f"variant={args.variant} trials={report.trials} "
          f"median_auc={report.auc:.4f} runtime={report.runtime_seconds:.4f}s "
          f"({report.edges_per_second:,.0f} edges/s)")
    if args.output:
        lines = ["parameter,auc,runtime_seconds",
                 f"{args.variant},{report.auc:.6f},{report.runtime_seconds:.6f}"]
        Path(args.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if figure:
        from . import plots
        plots.save_trials_figure(report, figure)
        print(f"figure -> {figure}")
    return 0


def _parse_burst(text: str) -> synth.Burst:
    parts = text.split(",")
    if len(parts) != 5:
        raise ParameterError(
            f"burst must be source,destination,start,duration,magnitude: {text!r}"
        )
    try:
        u, v, start, duration = (int(p) for p in parts[:4])
        magnitude = float(parts[4])
    except ValueError:
        raise ParameterError(f"malformed burst spec: {text!r}") from None
    return synth.Burst(source=u, destination=v, start_tick=start,
                       duration=duration, magnitude=magnitude)


def _cmd_synth(args) -> int:
    spec = synth.SynthSpec(
        nodes=args.nodes,
        ticks=args.ticks,
        background_rate=args.rate,
        bursts=tuple(_parse_burst(b) for b in args.burst or ()),
        seed=_seed_of(args),
        active_pairs=args.pairs,
    )
    stream = synth.generate(spec)
    stream_io.write_edges(stream, args.output, fmt=args.format)
    labels_path = args.labels_output or (args.output + ".labels")
    stream_io.write_labels(stream.labels, labels_path)
    print(f"wrote {stream.edge_count} edges over {stream.node_count} nodes "
          f"-> {args.output}, labels -> {labels_path}")
    return 0


def _cmd_bench(args) -> int:
    stream = stream_io.load_edges(args.input, fmt=args.format,
                                  tick_divisor=args.tick_divisor)
    cfg = _build_config(args)
    prefixes = [int(p) for p in args.prefixes.split(",") if p.strip()]
    rows = evaluation.bench_scaling(stream, cfg, prefixes,
                                    seed=_seed_of(args), repeats=args.repeats)
    print(f"{'edges':>10}  {'seconds':>10}  {'edges/s':>12}")
    for n, seconds in rows:
        print(f"{n:>10}  {seconds:>10.4f}  {n / seconds:>12,.0f}")
    if len(rows) >= 2:
        _, _, r2 = evaluation.linear_fit_r2([n for n, _ in rows],
                                            [t for _, t in rows])
        print(f"linear fit R^2 = {r2:.4f}")
    if args.output:
        lines = ["edges,seconds"] + [f"{n},{t:.6f}" for n, t in rows]
        Path(args.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
    figure = _figure_target(args.output, args.plot, args.no_plot)
    if figure:
        from . import plots
        plots.save_scaling_figure(rows, figure)
        print(f"figure -> {figure}")
    return 0


def _cmd_aggregate(args) -> int:
    stream = stream_io.load_edges(args.input, fmt=args.format,
                                  tick_divisor=args.tick_divisor)
    scores = stream_io.load_scores(args.scores)
    aggregates = evaluation.aggregate_by_tick(scores, stream.ticks, mode=args.mode)
    lines = ["tick,max_score,normalized"]
    lines += [f"{a.tick},{a.max_score:.9g},{a.normalized:.6f}" for a in aggregates]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"aggregated {len(aggregates)} ticks -> {args.output}")
    else:
        print(text, end="")
    figure = _figure_target(args.output, args.plot, args.no_plot)
    if figure:
        from . import plots
        plots.save_tick_series_figure(aggregates, figure)
        print(f"figure -> {figure}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgewatch",
        description="Streaming anomaly scores for graph edge streams",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score every edge of a stream")
    _add_input_flags(p_score)
    _add_detector_flags(p_score)
    p_score.add_argument("--output", default=None,
                         help="score file (default: <input>.scores)")
    p_score.add_argument("--decide", action="store_true",
                         help="also emit 0/1 decisions (midas only)")
    p_score.add_argument("--eps", type=float, default=0.01,
                         help="false-positive budget for --decide")
    p_score.add_argument("--nu", type=float, default=0.003,
                         help="sketch error bound for --decide")
    p_score.set_defaults(func=_cmd_score)

    p_eval = sub.add_parser("eval", help="ROC-AUC over repeated trials")
    _add_input_flags(p_eval)
    _add_detector_flags(p_eval)
    p_eval.add_argument("--labels", required=True, help="0/1 label file")
    p_eval.add_argument("--trials", type=int, default=21)
    p_eval.add_argument("--sweep", choices=evaluation.SWEEPABLE, default=None)
    p_eval.add_argument("--values", default=None,
                        help="comma-separated sweep values")
    p_eval.add_argument("--output", default=None, help="delimited report file")
    p_eval.add_argument("--plot", default=None, help="figure file override")
    p_eval.add_argument("--no-plot", action="store_true")
    p_eval.set_defaults(func=_cmd_eval, decide=False)

    p_synth = sub.add_parser("synth", help="generate a labeled synthetic stream")
    p_synth.add_argument("--nodes", type=int, default=50)
    p_synth.add_argument("--ticks", type=int, default=50)
    p_synth.add_argument("--rate", type=float, default=2.0,
                         help="mean background edges per (pair, tick)")
    p_synth.add_argument("--pairs", type=int, default=None,
                         help="active background pairs (default 3x nodes)")
    p_synth.add_argument("--burst", action="append", default=None,
                         metavar="U,V,START,DURATION,MAGNITUDE",
                         help="inject a burst (repeatable)")
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--format", choices=stream_io.FORMATS, default="comma")
    p_synth.add_argument("--output", required=True, help="edge file to write")
    p_synth.add_argument("--labels-output", default=None,
                         help="label file (default: <output>.labels)")
    p_synth.set_defaults(func=_cmd_synth)

    p_bench = sub.add_parser("bench", help="prefix-scaling benchmark")
    _add_input_flags(p_bench)
    _add_detector_flags(p_bench)
    p_bench.add_argument("--prefixes", required=True,
                         help="comma-separated ascending edge counts")
    p_bench.add_argument("--repeats", type=int, default=1)
    p_bench.add_argument("--output", default=None, help="delimited report file")
    p_bench.add_argument("--plot", default=None, help="figure file override")
    p_bench.add_argument("--no-plot", action="store_true")
    p_bench.set_defaults(func=_cmd_bench, decide=False)

    p_agg = sub.add_parser("aggregate", help="per-tick score maxima")
    _add_input_flags(p_agg)
    p_agg.add_argument("--scores", required=True, help="score file from `score`")
    p_agg.add_argument("--mode", choices=("max",), default="max")
    p_agg.add_argument("--output", default=None, help="delimited report file")
    p_agg.add_argument("--plot", default=None, help="figure file override")
    p_agg.add_argument("--no-plot", action="store_true")
    p_agg.set_defaults(func=_cmd_aggregate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"edgewatch: error: {exc}", file=sys.stderr)
        return 2
    except EdgewatchError as exc:
        print(f"edgewatch: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
