"""Command line interface.

Four subcommands: compare two recordings, evaluate a rated dataset,
export a perceptual spectrogram, and benchmark the pipeline. Results go
to stdout as aligned text (6 decimal places) or single-line JSON (full
precision); errors go to stderr with a stable exit code per failure
class.
"""
from __future__ import annotations

import argparse
import csv
import json
import re
import statistics
import sys
import time
from pathlib import Path

from . import __version__
from .audio_io import PIPELINE_RATE, load_audio, resample
from .compare import ComparisonConfig, compare_channels
from .errors import InvalidInputError, InvalidRangeError, exit_code_for
from .evaluate import evaluate_dataset, load_manifest
from .spectrogram import (
    compute_spectrogram,
    default_pipeline,
    write_spectrogram,
    write_spectrogram_csv,
)

_WINDOW_PATTERN = re.compile(r"^(\d+)x(\d+)$")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _window_spec(text: str) -> tuple[int, int]:
    match = _WINDOW_PATTERN.match(text)
    if not match:
        raise argparse.ArgumentTypeError(f"expected FRAMESxBINS (e.g. 8x8), got {text!r}")
    frames, bins = int(match.group(1)), int(match.group(2))
    if frames < 1 or bins < 1:
        raise argparse.ArgumentTypeError("window extents must be at least 1")
    return frames, bins


def _comparison_from_args(args: argparse.Namespace) -> ComparisonConfig:
    kwargs = {}
    if args.exponent is not None:
        kwargs["dtw_exponent"] = args.exponent
    if args.normalization is not None:
        kwargs["normalization_fraction"] = args.normalization
    if args.nsim_window is not None:
        kwargs["nsim_window_frames"], kwargs["nsim_window_bins"] = args.nsim_window
    return ComparisonConfig(**kwargs)


def _add_comparison_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--exponent", type=float, default=None, help="DTW cost exponent in (0, 1] (default 0.5)"
    )
    parser.add_argument(
        "--normalization",
        type=float,
        default=None,
        help="fraction of the loudness gap removed before comparing, in [0, 1] (default 0.82)",
    )
    parser.add_argument(
        "--nsim-window",
        type=_window_spec,
        default=None,
        metavar="FRAMESxBINS",
        help="NSIM window extents (default 8x8)",
    )


def _add_format_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        choices=("text", "json"),
        default="text",
        help="output format (default text)",
    )


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, separators=(", ", ": ")))


def _run_compare(args: argparse.Namespace) -> int:
    result = compare_channels(
        load_audio(args.reference),
        load_audio(args.degraded),
        comparison=_comparison_from_args(args),
    )
    if args.format == "json":
        _emit_json(
            {
                "per_channel_similarity": list(result.per_channel_similarity),
                "per_channel_distance": list(result.per_channel_distance),
                "aggregate_distance": result.aggregate_distance,
                "mos": result.mos,
            }
        )
    else:
        print(f"channels: {len(result.per_channel_similarity)}")
        for ch, (sim, dist) in enumerate(
            zip(result.per_channel_similarity, result.per_channel_distance)
        ):
            print(f"channel {ch}: similarity {sim:.6f}  distance {dist:.6f}")
        print(f"aggregate distance: {result.aggregate_distance:.6f}")
        print(f"mos: {result.mos:.6f}")
    return 0


def _write_per_pair_csv(path: Path, scored) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["reference", "degraded", "human_score", "mos", "aggregate_distance"])
        for item in scored:
            writer.writerow(
                [
                    str(item.pair.reference),
                    str(item.pair.degraded),
                    repr(item.pair.human_score),
                    repr(item.result.mos),
                    repr(item.result.aggregate_distance),
                ]
            )


def _fmt_coefficient(value: float | None, note: str | None) -> str:
    if value is None:
        return f"undefined ({note})" if note else "undefined"
    return f"{value:.6f}"


def _run_evaluate(args: argparse.Namespace) -> int:
    pairs = load_manifest(args.manifest)
    report, scored = evaluate_dataset(
        pairs, comparison=_comparison_from_args(args), jobs=args.jobs
    )
    if args.per_pair_out is not None:
        _write_per_pair_csv(Path(args.per_pair_out), scored)
    if args.figure_out is not None:
        from .figures import render_score_scatter

        metric = [item.score for item in scored]
        human = [item.pair.human_score for item in scored]
        render_score_scatter(metric, human, report, args.figure_out)

    if args.format == "json":
        _emit_json(
            {
                "n": report.n,
                "plcc": report.plcc,
                "srcc": report.srcc,
                "krcc": report.krcc,
                "notes": report.notes,
                "excluded": [
                    {
                        "reference": str(f.pair.reference),
                        "degraded": str(f.pair.degraded),
                        "reason": f.reason,
                    }
                    for f in report.excluded
                ],
            }
        )
    else:
        print(f"pairs scored: {report.n}")
        print(f"pairs excluded: {len(report.excluded)}")
        for failure in report.excluded:
            print(f"  {failure.pair.degraded}: {failure.reason}")
        print(f"plcc: {_fmt_coefficient(report.plcc, report.notes.get('plcc'))}")
        print(f"srcc: {_fmt_coefficient(report.srcc, report.notes.get('srcc'))}")
        print(f"krcc: {_fmt_coefficient(report.krcc, report.notes.get('krcc'))}")
    return 0


def _run_spectrogram(args: argparse.Namespace) -> int:
    buffer = load_audio(args.input)
    if not (0 <= args.channel < buffer.n_channels):
        raise InvalidRangeError(
            f"channel {args.channel} out of range for {buffer.n_channels}-channel input"
        )
    buffer = resample(buffer, PIPELINE_RATE)
    spec = compute_spectrogram(buffer.mono(args.channel), default_pipeline())
    write_spectrogram(args.out, spec)
    if args.csv_out is not None:
        write_spectrogram_csv(args.csv_out, spec)
    if args.figure_out is not None:
        from .figures import render_spectrogram_image

        render_spectrogram_image(spec, args.figure_out)

    if args.format == "json":
        _emit_json(
            {
                "out": str(args.out),
                "n_frames": spec.n_frames,
                "n_bins": spec.n_bins,
                "frame_rate": spec.frame_rate,
            }
        )
    else:
        print(f"wrote {args.out}: {spec.n_frames} frames x {spec.n_bins} bins at {spec.frame_rate} Hz")
    return 0


def _run_bench(args: argparse.Namespace) -> int:
    if args.repetitions < 1:
        raise InvalidInputError(f"repetitions must be at least 1, got {args.repetitions}")
    buffer = resample(load_audio(args.input), PIPELINE_RATE)
    pipeline = default_pipeline()
    comparison = ComparisonConfig()
    compare_channels(buffer, buffer, pipeline, comparison)  # warmup, untimed
    times = []
    for _ in range(args.repetitions):
        start = time.perf_counter()
        compare_channels(buffer, buffer, pipeline, comparison)
        times.append(time.perf_counter() - start)
    mean = statistics.fmean(times)
    stddev = statistics.stdev(times) if len(times) > 1 else 0.0

    import resource

    # ru_maxrss is KiB on Linux
    peak_mib = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0
    if args.format == "json":
        _emit_json(
            {
                "duration_s": buffer.duration,
                "repetitions": args.repetitions,
                "mean_s": mean,
                "stddev_s": stddev,
                "peak_memory_mib": peak_mib,
            }
        )
    else:
        print(f"duration: {buffer.duration:.6f} s")
        print(f"repetitions: {args.repetitions}")
        print(f"mean: {mean:.6f} s")
        print(f"stddev: {stddev:.6f} s")
        print(f"peak memory: {peak_mib:.1f} MiB")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="earsim", description="Perceptual audio similarity toolkit."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    compare = commands.add_parser("compare", help="score the similarity of two recordings")
    compare.add_argument("reference", help="reference WAV file")
    compare.add_argument("degraded", help="degraded WAV file")
    _add_comparison_flags(compare)
    _add_format_flag(compare)
    compare.set_defaults(handler=_run_compare)

    evaluate = commands.add_parser("evaluate", help="correlate metric scores with human ratings")
    evaluate.add_argument("manifest", help="CSV manifest with header reference,degraded,score")
    evaluate.add_argument(
        "--jobs", type=_positive_int, default=1, help="parallel worker processes (default 1)"
    )
    evaluate.add_argument(
        "--per-pair-out", default=None, metavar="CSV", help="also write per-pair scores to CSV"
    )
    evaluate.add_argument(
        "--figure-out",
        default=None,
        metavar="IMAGE",
        help="also render a metric-vs-human scatter plot",
    )
    _add_comparison_flags(evaluate)
    _add_format_flag(evaluate)
    evaluate.set_defaults(handler=_run_evaluate)

    spectrogram = commands.add_parser("spectrogram", help="export a perceptual spectrogram")
    spectrogram.add_argument("input", help="input WAV file")
    spectrogram.add_argument("out", help="binary spectrogram output path")
    spectrogram.add_argument(
        "--channel", type=int, default=0, help="channel to analyze (default 0)"
    )
    spectrogram.add_argument(
        "--csv-out", default=None, metavar="CSV", help="also write the frames as CSV"
    )
    spectrogram.add_argument(
        "--figure-out", default=None, metavar="IMAGE", help="also render a heatmap image"
    )
    _add_format_flag(spectrogram)
    spectrogram.set_defaults(handler=_run_spectrogram)

    bench = commands.add_parser("bench", help="time the comparison pipeline on a file")
    bench.add_argument("input", help="input WAV file, compared against itself")
    bench.add_argument(
        "--repetitions", type=int, default=5, help="timed repetitions (default 5)"
    )
    _add_format_flag(bench)
    bench.set_defaults(handler=_run_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except Exception as exc:  # mapped to stable exit codes
        code = exit_code_for(exc)
        name = type(exc).__name__
        print(f"earsim: error: {name}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
