"""Command-line front end: run one session, sweep grids, validate traces.

Verbosity is controlled by the SIMULSTREAM_LOG environment variable
(debug/info/warning; default warning).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .adapters.trace import read_trace, validate_trace
from .errors import SimulstreamError
from .harness import replay_stream, run_local_agreement, run_simulu, sweep
from .metrics import aggregate, end_offset, start_offset, write_csv
from .scenario import load_scenario
from .timeline import PolicyConfig
from .wavio import read_wav

POLICIES = ("simulu", "local-agreement")


def _setup_logging() -> None:
    level = os.environ.get("SIMULSTREAM_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _load_delays(path) -> list[float]:
    return [
        float(line.strip())
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--policy", choices=POLICIES, default="simulu")
    parser.add_argument("--segment-size", type=float, default=None,
                        help="seconds of audio per chunk (default 0.5)")
    parser.add_argument("--out", type=Path, default=None)


def cmd_run(args) -> int:
    delays = _load_delays(args.delays) if args.delays else None

    if args.trace is not None:
        trace = read_trace(args.trace)
        config = None
        if args.cutoff_frames is not None or args.word_history is not None \
                or args.segment_size is not None:
            meta = trace.metadata or {}
            config = PolicyConfig(
                cutoff_frames=args.cutoff_frames if args.cutoff_frames is not None
                else int(meta.get("cutoff_frames", 4)),
                word_history=args.word_history if args.word_history is not None
                else int(meta.get("word_history", 10)),
                segment_size=args.segment_size if args.segment_size is not None
                else float(meta.get("segment_size", 0.5)),
            )
        run = replay_stream(trace, config=config, delays=delays)
    else:
        if args.scenario is None:
            print("run: need --scenario (optionally with --wav) or --trace",
                  file=sys.stderr)
            return 1
        scenario = load_scenario(args.scenario)
        segment = args.segment_size if args.segment_size is not None else 0.5
        audio = None
        if args.wav is not None:
            audio, rate = read_wav(args.wav)
            if rate != 16000:
                print(f"run: WAV sample rate {rate} != 16000", file=sys.stderr)
                return 1
        if args.policy == "simulu":
            config = PolicyConfig(
                cutoff_frames=args.cutoff_frames if args.cutoff_frames is not None else 4,
                word_history=args.word_history if args.word_history is not None else 10,
                segment_size=segment,
            )
            run = run_simulu(
                scenario, config, audio=audio, trace_path=args.record_trace,
                delays=delays, noise_seed=args.seed,
            )
        else:
            run = run_local_agreement(scenario, segment_size=segment, audio=audio,
                                      delays=delays)

    result = run.result
    rows = aggregate([result])
    row = rows[0]
    print(f"policy={row.policy} f={row.f} wh={row.wh} segment_s={row.segment_s}")
    print(f"tokens={len(result.hypothesis())} emissions={len(run.emissions)}")
    bleu = "n/a" if row.bleu is None else f"{row.bleu:.3f}"
    start = start_offset(result, basis="samples" if result.emits_audio() else "tokens")
    start_text = "n/a" if start is None else repr(start)
    print(f"bleu={bleu} start_offset_s={start_text} end_offset_ms={end_offset(result)!r}")

    if args.out is not None:
        args.out.write_text(run.log_text(), encoding="utf-8")
    else:
        sys.stdout.write(run.log_text())
    return 0


def cmd_sweep(args) -> int:
    scenarios = [load_scenario(p) for p in args.scenario]
    if not scenarios:
        print("sweep: need at least one --scenario", file=sys.stderr)
        return 1
    f_grid = args.cutoff_frames or [2, 4, 6, 8]
    wh_grid = args.word_history or [5, 10, 15, 20, 25]
    seg_grid = args.segment_size or [0.5]
    rows, failures = sweep(scenarios, f_grid, wh_grid, seg_grid, policy=args.policy)
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, sys.stdout)
    for failure in failures:
        print(f"sweep: cell {failure.cell} scenario {failure.scenario_index} "
              f"failed: {failure.error}", file=sys.stderr)
    return 1 if failures else 0


def cmd_validate_trace(args) -> int:
    report = validate_trace(args.path)
    print(report.summary())
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulstream",
        description="Streaming translation policy engine: run, sweep, validate traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="drive one stream end to end")
    _add_common(run)
    run.add_argument("--cutoff-frames", type=int, default=None)
    run.add_argument("--word-history", type=int, default=None)
    run.add_argument("--scenario", type=Path, default=None)
    run.add_argument("--trace", type=Path, default=None, help="replay a recorded trace")
    run.add_argument("--wav", type=Path, default=None,
                     help="16-bit PCM mono source audio (with --scenario)")
    run.add_argument("--record-trace", type=Path, default=None,
                     help="record the model calls of this run")
    run.add_argument("--seed", type=int, default=None, help="override scenario noise seed")
    run.add_argument("--delays", type=Path, default=None,
                     help="file of per-emission compute delays, seconds")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="grid over cutoff frames x word history x segment size")
    sw.add_argument("--policy", choices=POLICIES, default="simulu")
    sw.add_argument("--scenario", type=Path, action="append", default=[])
    sw.add_argument("--cutoff-frames", type=_int_list, default=None,
                    help="comma list, default 2,4,6,8")
    sw.add_argument("--word-history", type=_int_list, default=None,
                    help="comma list, default 5,10,15,20,25")
    sw.add_argument("--segment-size", type=_float_list, default=None,
                    help="comma list of seconds, default 0.5")
    sw.add_argument("--out", type=Path, default=None)
    sw.set_defaults(func=cmd_sweep)

    val = sub.add_parser("validate-trace", help="schema walk plus replay dry-run")
    val.add_argument("path", type=Path)
    val.set_defaults(func=cmd_validate_trace)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SimulstreamError, OSError, ValueError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
