"""Latency and quality accounting over recorded emission events.

The clock model is ideal (non-computation-aware): an emission's timestamp
is the source seconds consumed when it was produced, plus any injected
per-step compute delays accumulated so far. Quality is corpus BLEU over
committed token text; there is no re-transcription front end.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import StateError
from .timeline import PolicyConfig


@dataclass
class EmissionRecord:
    """One committed output event, as the metrics see it."""

    source_consumed_at_emit: float  # seconds
    target_samples: int
    tokens: list[str] = field(default_factory=list)
    compute_delay: float = 0.0  # injected, seconds


@dataclass
class RunResult:
    """Everything one full stream run leaves behind."""

    emissions: list[EmissionRecord]
    source_duration: float
    config: PolicyConfig
    policy: str = "simulu"
    reference: list[str] | None = None
    finished: bool = True

    def hypothesis(self) -> list[str]:
        return [t for e in self.emissions for t in e.tokens]

    def emits_audio(self) -> bool:
        return any(e.target_samples > 0 for e in self.emissions)


def start_offset(run: RunResult, basis: str = "samples") -> float | None:
    """Source seconds consumed before the first target output.

    ``basis="samples"`` is the standard definition (first emission with
    non-empty target samples); ``basis="tokens"`` serves text-only
    policies that never produce audio. Returns None when the run emitted
    nothing.
    """
    if basis not in ("samples", "tokens"):
        raise ValueError("basis must be 'samples' or 'tokens'")
    for e in run.emissions:
        produced = e.target_samples if basis == "samples" else len(e.tokens)
        if produced > 0:
            return e.source_consumed_at_emit
    return None


def end_offset(run: RunResult) -> float:
    """Milliseconds between the end of the source stream and the final output.

    The final output event is the last recorded emission event (the flush);
    with zero injected delays it coincides with the stream end, giving 0.
    """
    if not run.finished:
        raise StateError("end_offset on an unfinished run")
    if not run.emissions:
        return 0.0
    delay = math.fsum(e.compute_delay for e in run.emissions)
    last = run.emissions[-1]
    return (last.source_consumed_at_emit + delay - run.source_duration) * 1000.0


def _ngram_counts(doc: list[str], n: int) -> Counter:
    return Counter(tuple(doc[i:i + n]) for i in range(len(doc) - n + 1))


def corpus_bleu(hypotheses: list[list[str]], references: list[list[str]]) -> float:
    """Corpus-level BLEU-4 with brevity penalty, no smoothing.

    Modified n-gram precisions are pooled over the corpus; any pooled
    precision of zero (including a zero candidate count) scores 0.
    """
    if not hypotheses or len(hypotheses) != len(references):
        raise ValueError("need equal, non-empty hypothesis/reference corpora")
    hyp_len = sum(len(h) for h in hypotheses)
    ref_len = sum(len(r) for r in references)
    if hyp_len == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        matched = 0
        total = 0
        for hyp, ref in zip(hypotheses, references):
            hyp_counts = _ngram_counts(hyp, n)
            ref_counts = _ngram_counts(ref, n)
            total += max(len(hyp) - n + 1, 0)
            matched += sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
        if matched == 0 or total == 0:
            return 0.0
        log_sum += math.log(matched / total)
    bp = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return bp * math.exp(log_sum / 4.0) * 100.0


CSV_HEADER = "policy,f,wh,segment_s,bleu,start_offset_s,end_offset_ms,end_offset_std_ms,runs"


@dataclass
class SweepRow:
    policy: str
    f: int
    wh: int
    segment_s: float
    bleu: float | None
    start_offset_s: float | None
    end_offset_ms: float
    end_offset_std_ms: float
    runs: int


def aggregate(runs: list[RunResult]) -> list[SweepRow]:
    """One row per (policy, f, WH, segment) cell, ordered by cell key.

    StartOffset aggregates as the mean over runs, excluding undefined and
    negative values; EndOffset reports mean and population std.
    """
    cells: dict[tuple, list[RunResult]] = {}
    for r in runs:
        key = (r.policy, r.config.cutoff_frames, r.config.word_history, r.config.segment_size)
        cells.setdefault(key, []).append(r)

    rows: list[SweepRow] = []
    for key in sorted(cells):
        group = cells[key]
        policy, f, wh, seg = key
        basis = "samples" if any(r.emits_audio() for r in group) else "tokens"
        starts = [start_offset(r, basis=basis) for r in group]
        starts = [s for s in starts if s is not None and s >= 0]
        ends = [end_offset(r) for r in group]
        scored = [r for r in group if r.reference is not None]
        bleu = None
        if scored:
            bleu = corpus_bleu([r.hypothesis() for r in scored], [r.reference for r in scored])
        rows.append(
            SweepRow(
                policy=policy,
                f=f,
                wh=wh,
                segment_s=seg,
                bleu=bleu,
                start_offset_s=float(np.mean(starts)) if starts else None,
                end_offset_ms=float(np.mean(ends)),
                end_offset_std_ms=float(np.std(ends)),
                runs=len(group),
            )
        )
    return rows


def write_csv(rows: list[SweepRow], out) -> None:
    """RFC-4180 CSV with the fixed sweep header; ``out`` is a writable text file."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for r in rows:
        writer.writerow(
            [
                r.policy,
                r.f,
                r.wh,
                r.segment_s,
                "" if r.bleu is None else r.bleu,
                "" if r.start_offset_s is None else r.start_offset_s,
                r.end_offset_ms,
                r.end_offset_std_ms,
                r.runs,
            ]
        )
