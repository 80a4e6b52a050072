"""Trace files: recorded model calls for exact, model-free replay.

Format: UTF-8 JSON Lines. The first line is a header carrying the format
version, the adapter rates and free-form metadata (recording config,
exporter settings). Every following line is one event with a strictly
sequential ordinal shared across kinds:

    {"kind": "chunk", "ordinal": 0, "n_samples": 8000, "duration_s": 0.5}
    {"kind": "transcribe", "ordinal": 1, "tokens": [...], "word_start": [...],
     "rows": R, "cols": C, "attention": [row-major floats]}
    {"kind": "synthesize", "ordinal": 2, "units": [...], "rows": R, "cols": C,
     "attention": [...], "n_samples": N, "waveform": [floats] | null,
     "sidecar": "name.pcm" | null}

Floats go through json's shortest round-trip representation, so replay is
bit-stable. Waveforms may instead live in raw little-endian 16-bit PCM
sidecar files next to the trace (one per synthesize event).

Replay is strictly sequential: a single cursor walks the events; the
replay adapter consumes transcribe/synthesize events and the stream driver
consumes chunk events, so any divergence from the recorded call sequence
surfaces as a desync error at the exact event.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import (
    TraceDesyncError,
    TraceParseError,
    TraceVersionError,
)
from ..policy import TextHistory
from ..timeline import AdapterSpec, SpeechHistory
from .base import SynthesisOutput, TranscribeResult

TRACE_VERSION = 1


@dataclass
class ChunkEvent:
    ordinal: int
    n_samples: int
    duration_s: float


@dataclass
class TranscribeEvent:
    ordinal: int
    tokens: list[str]
    word_start: list[bool]
    attention: np.ndarray


@dataclass
class SynthesizeEvent:
    ordinal: int
    units: list[int]
    attention: np.ndarray
    waveform: np.ndarray  # float32
    sidecar: str | None = None


@dataclass
class Trace:
    spec: AdapterSpec
    metadata: dict
    events: list = field(default_factory=list)

    def count(self, kind) -> int:
        return sum(isinstance(e, kind) for e in self.events)


def _f32_to_pcm16(waveform: np.ndarray) -> bytes:
    scaled = np.clip(np.rint(np.asarray(waveform, dtype=np.float64) * 32768.0), -32768, 32767)
    return scaled.astype("<i2").tobytes()


def _pcm16_to_f32(raw: bytes) -> np.ndarray:
    return (np.frombuffer(raw, dtype="<i2").astype(np.float32)) / 32768.0


class TraceWriter:
    """Streams events to a trace file; use as a context manager."""

    def __init__(
        self,
        path,
        spec: AdapterSpec,
        metadata: dict | None = None,
        waveform_storage: str = "inline",
    ):
        if waveform_storage not in ("inline", "sidecar"):
            raise ValueError("waveform_storage must be 'inline' or 'sidecar'")
        self.path = Path(path)
        self.spec = spec
        self.waveform_storage = waveform_storage
        self._ordinal = 0
        self._fh = open(self.path, "w", encoding="utf-8")
        header = {
            "version": TRACE_VERSION,
            "sample_rate": spec.sample_rate,
            "frame_rate": spec.frame_rate,
            "unit_rate": spec.unit_rate,
            "reduction_rate": spec.reduction_rate,
            "metadata": metadata or {},
        }
        self._line(header)

    def _line(self, obj) -> None:
        self._fh.write(json.dumps(obj, ensure_ascii=False) + "\n")

    def _next(self) -> int:
        n = self._ordinal
        self._ordinal += 1
        return n

    def write_chunk(self, n_samples: int, duration_s: float) -> None:
        self._line(
            {
                "kind": "chunk",
                "ordinal": self._next(),
                "n_samples": int(n_samples),
                "duration_s": float(duration_s),
            }
        )

    def write_transcribe(self, result: TranscribeResult) -> None:
        attn = np.asarray(result.attention, dtype=np.float64)
        self._line(
            {
                "kind": "transcribe",
                "ordinal": self._next(),
                "tokens": list(result.new_tokens),
                "word_start": [bool(b) for b in result.word_start_flags],
                "rows": int(attn.shape[0]),
                "cols": int(attn.shape[1]) if attn.ndim == 2 else 0,
                "attention": [float(x) for x in attn.ravel()],
            }
        )

    def write_synthesize(self, output: SynthesisOutput) -> None:
        attn = np.asarray(output.attention, dtype=np.float64)
        waveform = np.asarray(output.waveform, dtype=np.float32)
        ordinal = self._next()
        record = {
            "kind": "synthesize",
            "ordinal": ordinal,
            "units": [int(u) for u in output.units],
            "rows": int(attn.shape[0]),
            "cols": int(attn.shape[1]) if attn.ndim == 2 else 0,
            "attention": [float(x) for x in attn.ravel()],
            "n_samples": int(len(waveform)),
            "waveform": None,
            "sidecar": None,
        }
        if self.waveform_storage == "inline":
            record["waveform"] = [float(x) for x in waveform]
        else:
            name = f"{self.path.name}.{ordinal}.pcm"
            (self.path.parent / name).write_bytes(_f32_to_pcm16(waveform))
            record["sidecar"] = name
        self._line(record)

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _parse_matrix(obj: dict, line: int) -> np.ndarray:
    rows, cols = obj.get("rows"), obj.get("cols")
    values = obj.get("attention")
    if not isinstance(rows, int) or not isinstance(cols, int) or not isinstance(values, list):
        raise TraceParseError("event lacks rows/cols/attention", line)
    if rows * cols != len(values):
        raise TraceParseError(
            f"attention has {len(values)} values, expected rows*cols = {rows * cols}", line
        )
    return np.asarray(values, dtype=np.float64).reshape(rows, cols)


def read_trace(path) -> Trace:
    """Parse and structurally validate a trace file."""
    path = Path(path)
    trace = None
    expected_ordinal = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise TraceParseError(f"invalid JSON ({exc.msg})", line_no) from exc
            if not isinstance(obj, dict):
                raise TraceParseError("record is not an object", line_no)

            if trace is None:
                version = obj.get("version")
                if version != TRACE_VERSION:
                    raise TraceVersionError(
                        f"unsupported trace version {version!r} (expected {TRACE_VERSION})"
                    )
                try:
                    spec = AdapterSpec(
                        sample_rate=obj["sample_rate"],
                        frame_rate=obj["frame_rate"],
                        unit_rate=obj["unit_rate"],
                        reduction_rate=obj["reduction_rate"],
                    )
                except Exception as exc:
                    raise TraceParseError(f"bad header: {exc}", line_no) from exc
                trace = Trace(spec=spec, metadata=obj.get("metadata", {}))
                continue

            kind = obj.get("kind")
            ordinal = obj.get("ordinal")
            if ordinal != expected_ordinal:
                raise TraceParseError(
                    f"ordinal {ordinal!r}, expected {expected_ordinal}", line_no
                )
            expected_ordinal += 1

            if kind == "chunk":
                trace.events.append(
                    ChunkEvent(
                        ordinal=ordinal,
                        n_samples=int(obj["n_samples"]),
                        duration_s=float(obj["duration_s"]),
                    )
                )
            elif kind == "transcribe":
                tokens = obj.get("tokens")
                flags = obj.get("word_start")
                if not isinstance(tokens, list) or not isinstance(flags, list):
                    raise TraceParseError("transcribe lacks tokens/word_start", line_no)
                if len(tokens) != len(flags):
                    raise TraceParseError("word_start length != tokens", line_no)
                attn = _parse_matrix(obj, line_no)
                if attn.shape[0] != len(tokens):
                    raise TraceParseError(
                        f"attention rows {attn.shape[0]} != tokens {len(tokens)}", line_no
                    )
                trace.events.append(
                    TranscribeEvent(
                        ordinal=ordinal,
                        tokens=[str(t) for t in tokens],
                        word_start=[bool(b) for b in flags],
                        attention=attn,
                    )
                )
            elif kind == "synthesize":
                units = obj.get("units")
                if not isinstance(units, list):
                    raise TraceParseError("synthesize lacks units", line_no)
                attn = _parse_matrix(obj, line_no)
                if attn.shape[0] != len(units):
                    raise TraceParseError(
                        f"attention rows {attn.shape[0]} != units {len(units)}", line_no
                    )
                n_samples = obj.get("n_samples")
                if obj.get("waveform") is not None:
                    waveform = np.asarray(obj["waveform"], dtype=np.float32)
                elif obj.get("sidecar"):
                    sidecar = path.parent / obj["sidecar"]
                    if not sidecar.exists():
                        raise TraceParseError(f"missing sidecar {obj['sidecar']}", line_no)
                    waveform = _pcm16_to_f32(sidecar.read_bytes())
                else:
                    raise TraceParseError("synthesize carries neither waveform nor sidecar", line_no)
                if n_samples != len(waveform):
                    raise TraceParseError(
                        f"n_samples {n_samples} != waveform length {len(waveform)}", line_no
                    )
                if len(waveform) != len(units) * trace.spec.reduction_rate:
                    raise TraceParseError(
                        "waveform length != units * reduction_rate", line_no
                    )
                trace.events.append(
                    SynthesizeEvent(
                        ordinal=ordinal,
                        units=[int(u) for u in units],
                        attention=attn,
                        waveform=waveform,
                        sidecar=obj.get("sidecar"),
                    )
                )
            else:
                raise TraceParseError(f"unknown event kind {kind!r}", line_no)
    if trace is None:
        raise TraceParseError("empty file, missing header", 1)
    return trace


def write_trace(path, trace: Trace, waveform_storage: str = "inline") -> None:
    """Serialize a whole event log; read_trace(write_trace(t)) is lossless."""
    with TraceWriter(path, trace.spec, metadata=trace.metadata,
                     waveform_storage=waveform_storage) as writer:
        for event in trace.events:
            if isinstance(event, ChunkEvent):
                writer.write_chunk(event.n_samples, event.duration_s)
            elif isinstance(event, TranscribeEvent):
                writer.write_transcribe(
                    TranscribeResult(
                        new_tokens=list(event.tokens),
                        word_start_flags=list(event.word_start),
                        attention=event.attention,
                    )
                )
            elif isinstance(event, SynthesizeEvent):
                writer.write_synthesize(
                    SynthesisOutput(
                        units=list(event.units),
                        attention=event.attention,
                        waveform=event.waveform,
                    )
                )
            else:
                raise TypeError(f"unknown event type {type(event).__name__}")


class ReplayCursor:
    """Single shared cursor over a trace's events."""

    def __init__(self, trace: Trace):
        self.trace = trace
        self.index = 0

    def remaining(self) -> int:
        return len(self.trace.events) - self.index

    def peek(self):
        if self.index >= len(self.trace.events):
            return None
        return self.trace.events[self.index]

    def take(self, kind):
        event = self.peek()
        if event is None:
            raise TraceDesyncError(
                f"trace exhausted while expecting a {kind.__name__} event"
            )
        if not isinstance(event, kind):
            raise TraceDesyncError(
                f"expected {kind.__name__} at ordinal {event.ordinal}, "
                f"found {type(event).__name__}"
            )
        self.index += 1
        return event


class ReplayAdapter:
    """Observationally replays the adapter that produced a trace."""

    def __init__(self, cursor: ReplayCursor):
        self.cursor = cursor

    def spec(self) -> AdapterSpec:
        return self.cursor.trace.spec

    def transcribe(self, speech: SpeechHistory, prefix: TextHistory) -> TranscribeResult:
        event = self.cursor.take(TranscribeEvent)
        return TranscribeResult(
            new_tokens=list(event.tokens),
            word_start_flags=list(event.word_start),
            attention=event.attention,
        )

    def synthesize(self, text: TextHistory) -> SynthesisOutput:
        event = self.cursor.take(SynthesizeEvent)
        return SynthesisOutput(
            units=list(event.units),
            attention=event.attention,
            waveform=event.waveform,
        )


class RecordingAdapter:
    """Tees every model call of a live adapter into a TraceWriter."""

    def __init__(self, inner, writer: TraceWriter):
        self.inner = inner
        self.writer = writer

    def spec(self) -> AdapterSpec:
        return self.inner.spec()

    def transcribe(self, speech: SpeechHistory, prefix: TextHistory) -> TranscribeResult:
        result = self.inner.transcribe(speech, prefix)
        self.writer.write_transcribe(result)
        return result

    def synthesize(self, text: TextHistory) -> SynthesisOutput:
        output = self.inner.synthesize(text)
        self.writer.write_synthesize(output)
        return output


@dataclass
class ValidationReport:
    path: str
    ok: bool
    version: int | None = None
    event_counts: dict = field(default_factory=dict)
    findings: list[str] = field(default_factory=list)
    dry_run: str = "skipped"

    def summary(self) -> str:
        lines = [f"trace: {self.path}"]
        if self.ok:
            counts = ", ".join(f"{k}={v}" for k, v in sorted(self.event_counts.items()))
            lines.append(f"ok (version {self.version}; {counts or 'no events'})")
        else:
            lines.append(f"{len(self.findings)} finding(s):")
            lines.extend(f"  - {f}" for f in self.findings)
        lines.append(f"replay dry-run: {self.dry_run}")
        return "\n".join(lines)


def validate_trace(path, row_sum_tol: float = 1e-6) -> ValidationReport:
    """Full schema walk plus a replay dry-run when the header carries a config."""
    report = ValidationReport(path=str(path), ok=True)
    try:
        trace = read_trace(path)
    except (TraceParseError, TraceVersionError) as exc:
        report.ok = False
        report.findings.append(str(exc))
        return report

    report.version = TRACE_VERSION
    for event in trace.events:
        name = type(event).__name__.removesuffix("Event").lower()
        report.event_counts[name] = report.event_counts.get(name, 0) + 1
        attn = getattr(event, "attention", None)
        if attn is not None and attn.shape[0] > 0:
            sums = attn.sum(axis=1)
            bad = np.flatnonzero(np.abs(sums - 1.0) > row_sum_tol)
            if bad.size:
                report.ok = False
                report.findings.append(
                    f"event {event.ordinal}: attention row {int(bad[0])} "
                    f"sums to {sums[bad[0]]!r}"
                )

    meta = trace.metadata or {}
    if {"cutoff_frames", "word_history", "segment_size"} <= set(meta):
        from ..harness import replay_stream  # deferred: harness imports this module

        try:
            replay_stream(trace)
            report.dry_run = "ok"
        except Exception as exc:  # any failure is a finding
            report.dry_run = f"failed: {exc}"
            report.ok = False
            report.findings.append(f"replay dry-run failed: {exc}")
    return report
