"""Chunked inference over an audio file, recorded as a simulstream trace.

The exporter runs the engine's own stepping loop (chunk -> transcribe ->
optional synthesize) with a recording adapter wrapped around the live
model, so a later replay reproduces the exact call sequence by
construction. By default no end-of-stream flush is recorded: the trace
carries exactly one transcribe event per chunk; the engine's replay driver
only flushes when trailing events exist.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from simulstream.adapters.trace import RecordingAdapter, TraceWriter
from simulstream.harness import iter_chunks
from simulstream.policy import new_session
from simulstream.timeline import PolicyConfig
from simulstream.wavio import read_wav

from .adapter import ModelAdapter
from .errors import ExporterError, ExportWriteError
from .model import load_model


@dataclass(frozen=True)
class ExportConfig:
    model: str
    aggregation: str  # e.g. "layer1.heads_mean"; stamped into trace metadata
    segment_size: float = 0.5
    lang_pair: str = "en-xx"
    cutoff_frames: int = 4
    word_history: int = 10
    flush_at_end: bool = False

    def __post_init__(self):
        if not self.segment_size > 0:
            raise ExporterError("segment_size must be > 0")


def export_trace(cfg: ExportConfig, audio_path, out_path) -> Path:
    """Run chunked inference on ``audio_path`` and write a trace to ``out_path``."""
    model = load_model(cfg.model)
    adapter = ModelAdapter(model, cfg.aggregation)  # validates the aggregation
    samples, rate = read_wav(audio_path)
    if rate != model.sample_rate:
        raise ExporterError(f"audio is {rate} Hz, model expects {model.sample_rate}")

    policy = PolicyConfig(
        cutoff_frames=cfg.cutoff_frames,
        word_history=cfg.word_history,
        segment_size=cfg.segment_size,
    )
    metadata = {
        "exporter": "s2st-trace-exporter",
        "model": cfg.model,
        "aggregation": cfg.aggregation,
        "lang_pair": cfg.lang_pair,
        "exported_at": datetime.now(timezone.utc).isoformat(),
        "policy": "simulu",
        "cutoff_frames": policy.cutoff_frames,
        "word_history": policy.word_history,
        "segment_size": policy.segment_size,
    }

    out_path = Path(out_path)
    try:
        writer = TraceWriter(out_path, adapter.spec(), metadata=metadata)
    except OSError as exc:
        raise ExportWriteError(f"cannot write {out_path}: {exc}") from exc
    try:
        recording = RecordingAdapter(adapter, writer)
        session = new_session(policy, recording)
        for chunk in iter_chunks(samples, cfg.segment_size, rate):
            session.push_audio(chunk)
            writer.write_chunk(len(chunk.samples), chunk.duration)
            session.step()
        if cfg.flush_at_end and session.chunks_ingested:
            session.finish()
    except OSError as exc:
        raise ExportWriteError(f"failed while writing {out_path}: {exc}") from exc
    finally:
        writer.close()
    return out_path
