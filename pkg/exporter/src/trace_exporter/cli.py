"""Command-line front end mirroring ExportConfig."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ExporterError
from .export import ExportConfig, export_trace


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="export-trace",
        description="Run chunked S2ST inference on an audio file and record a trace.",
    )
    parser.add_argument("audio", type=Path, help="16-bit PCM mono WAV input")
    parser.add_argument("--out", type=Path, required=True, help="trace file to write")
    parser.add_argument("--model", default="toy-s2st-v1")
    parser.add_argument(
        "--aggregation", required=True,
        help="attention pooling, e.g. layer1.heads_mean / layer0.head2 "
             "(explicit on purpose: the right layer is model-specific)",
    )
    parser.add_argument("--segment-size", type=float, default=0.5)
    parser.add_argument("--lang-pair", default="en-xx")
    parser.add_argument("--cutoff-frames", type=int, default=4)
    parser.add_argument("--word-history", type=int, default=10)
    parser.add_argument("--flush-at-end", action="store_true",
                        help="also record the end-of-stream flush step")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = ExportConfig(
        model=args.model,
        aggregation=args.aggregation,
        segment_size=args.segment_size,
        lang_pair=args.lang_pair,
        cutoff_frames=args.cutoff_frames,
        word_history=args.word_history,
        flush_at_end=args.flush_at_end,
    )
    try:
        path = export_trace(cfg, args.audio, args.out)
    except (ExporterError, OSError, ValueError) as exc:
        print(f"export-trace: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
