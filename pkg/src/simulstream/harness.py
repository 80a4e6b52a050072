"""Stream drivers: run scenarios, replay traces, sweep configuration grids.

A driver owns the push/step/finish loop, collects EmissionRecords for the
metrics, and renders the emission log (one tab-separated line per actual
emission: ordinal, source seconds at emit, sample count, token text).
Floats in log lines use repr, i.e. the shortest round-trip form, so equal
runs produce byte-identical logs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .adapters.oracle import OracleAdapter
from .adapters.trace import (
    ChunkEvent,
    RecordingAdapter,
    ReplayAdapter,
    ReplayCursor,
    Trace,
    TraceWriter,
    TranscribeEvent,
)
from .baselines import LaSession, VadConfig, la_step, vad_segment
from .errors import TraceDesyncError
from .metrics import EmissionRecord, RunResult, aggregate
from .policy import Emission, new_session
from .scenario import Scenario, scenario_audio
from .timeline import AudioChunk, PolicyConfig

log = logging.getLogger("simulstream")


@dataclass
class StreamRun:
    """A finished run: metric records plus the emission log."""

    result: RunResult
    emissions: list[Emission] = field(default_factory=list)
    log_lines: list[str] = field(default_factory=list)

    @property
    def committed(self) -> list[str]:
        return self.result.hypothesis()

    def log_text(self) -> str:
        return "".join(line + "\n" for line in self.log_lines)


def format_emission_line(ordinal: int, emission: Emission) -> str:
    return (
        f"{ordinal}\t{emission.source_consumed_at_emit!r}"
        f"\t{len(emission.waveform)}\t{' '.join(emission.new_tokens)}"
    )


def iter_chunks(samples: np.ndarray, segment_size: float, sample_rate: int):
    """Split a stream into segment-sized chunks (final one may be shorter)."""
    step = round(segment_size * sample_rate)
    if step <= 0:
        raise ValueError("segment_size too small for the sample rate")
    for pos in range(0, len(samples), step):
        part = samples[pos:pos + step]
        yield AudioChunk(samples=part, duration=len(part) / sample_rate)


def _apply_delays(records: list[EmissionRecord], delays: list[float]) -> None:
    # one injected delay per record; leftovers pile onto the final record so
    # the injected total always reaches the clock
    if not delays or not records:
        return
    for i, record in enumerate(records):
        if i < len(delays):
            record.compute_delay = delays[i]
    extra = delays[len(records):]
    if extra:
        records[-1].compute_delay += math.fsum(extra)


def run_simulu(
    scenario: Scenario,
    config: PolicyConfig,
    audio: np.ndarray | None = None,
    trace_path=None,
    trace_storage: str = "inline",
    delays: list[float] | None = None,
    noise_seed: int | None = None,
    step_callback=None,
) -> StreamRun:
    """Drive the attention-guided policy over one scenario stream."""
    if noise_seed is not None:
        scenario = Scenario(
            words=scenario.words,
            duration_s=scenario.duration_s,
            sharpness=scenario.sharpness,
            noise_seed=noise_seed,
            noise_amp=scenario.noise_amp,
            delays_s=scenario.delays_s,
            reference=scenario.reference,
        )
    adapter = OracleAdapter(scenario.script())
    spec = adapter.spec()
    if audio is None:
        audio = scenario_audio(scenario, spec)

    writer = None
    if trace_path is not None:
        metadata = {
            "policy": "simulu",
            "cutoff_frames": config.cutoff_frames,
            "word_history": config.word_history,
            "segment_size": config.segment_size,
            "noise_seed": scenario.noise_seed,
            "reference": " ".join(scenario.reference_tokens()),
        }
        writer = TraceWriter(trace_path, spec, metadata=metadata, waveform_storage=trace_storage)
        adapter = RecordingAdapter(adapter, writer)

    session = new_session(config, adapter)
    emissions: list[Emission] = []
    records: list[EmissionRecord] = []
    try:
        for chunk in iter_chunks(audio, config.segment_size, spec.sample_rate):
            session.push_audio(chunk)
            if writer is not None:
                writer.write_chunk(len(chunk.samples), chunk.duration)
            emission = session.step()
            if emission is not None:
                emissions.append(emission)
                records.append(_record(emission))
            if step_callback is not None:
                step_callback(session, emission)
            log.debug(
                "step: consumed=%.2fs committed=%d", session.source_consumed,
                session.text.total_committed,
            )
        flushed = session.finish()
        flush_emission = flushed[0] if flushed else None
        if flush_emission is not None:
            emissions.append(flush_emission)
            records.append(_record(flush_emission))
        if step_callback is not None:
            step_callback(session, flush_emission)
    finally:
        if writer is not None:
            writer.close()

    duration = len(audio) / spec.sample_rate
    records.append(EmissionRecord(source_consumed_at_emit=session.source_consumed,
                                  target_samples=0))
    _apply_delays(records, delays if delays is not None else scenario.delays_s)
    result = RunResult(
        emissions=records,
        source_duration=duration,
        config=config,
        policy="simulu",
        reference=scenario.reference_tokens(),
        finished=True,
    )
    return StreamRun(
        result=result,
        emissions=emissions,
        log_lines=[format_emission_line(i, e) for i, e in enumerate(emissions)],
    )


def _record(emission: Emission) -> EmissionRecord:
    return EmissionRecord(
        source_consumed_at_emit=emission.source_consumed_at_emit,
        target_samples=len(emission.waveform),
        tokens=list(emission.new_tokens),
    )


def replay_stream(
    trace: Trace,
    config: PolicyConfig | None = None,
    delays: list[float] | None = None,
) -> StreamRun:
    """Re-run the policy from a recorded trace; desyncs raise TraceDesyncError."""
    meta = trace.metadata or {}
    if config is None:
        try:
            config = PolicyConfig(
                cutoff_frames=int(meta["cutoff_frames"]),
                word_history=int(meta["word_history"]),
                segment_size=float(meta["segment_size"]),
            )
        except KeyError as exc:
            raise TraceDesyncError(
                f"trace metadata lacks a policy config field: {exc}"
            ) from exc
    cursor = ReplayCursor(trace)
    adapter = ReplayAdapter(cursor)
    spec = adapter.spec()
    session = new_session(config, adapter)
    emissions: list[Emission] = []
    records: list[EmissionRecord] = []

    while cursor.remaining():
        head = cursor.peek()
        if isinstance(head, ChunkEvent):
            cursor.take(ChunkEvent)
            session.push_audio(
                AudioChunk(
                    samples=np.zeros(head.n_samples, dtype=np.float32),
                    duration=head.duration_s,
                )
            )
            emission = session.step()
        elif isinstance(head, TranscribeEvent):
            # a trailing transcribe without a chunk is the recorded flush
            flushed = session.finish()
            emission = flushed[0] if flushed else None
        else:
            raise TraceDesyncError(
                f"unexpected {type(head).__name__} at ordinal {head.ordinal}"
            )
        if emission is not None:
            emissions.append(emission)
            records.append(_record(emission))
    if not session.finished:
        session.finished = True  # recorded run ended without a flush

    records.append(EmissionRecord(source_consumed_at_emit=session.source_consumed,
                                  target_samples=0))
    _apply_delays(records, delays or [])
    reference = meta.get("reference")
    result = RunResult(
        emissions=records,
        source_duration=session.source_consumed,
        config=config,
        policy=str(meta.get("policy", "simulu")),
        reference=reference.split() if isinstance(reference, str) and reference else None,
        finished=True,
    )
    return StreamRun(
        result=result,
        emissions=emissions,
        log_lines=[format_emission_line(i, e) for i, e in enumerate(emissions)],
    )


def run_local_agreement(
    scenario: Scenario,
    segment_size: float = 1.0,
    vad_config: VadConfig | None = None,
    audio: np.ndarray | None = None,
    delays: list[float] | None = None,
) -> StreamRun:
    """Text-only LocalAgreement baseline over VAD segments with memory reset.

    Each VAD segment gets a fresh session (memory reset); within a segment
    the oracle re-decodes the audio heard so far after every chunk, and the
    last hypothesis is committed in full when the segment closes. Emission
    records carry tokens but no audio. The returned config encodes the
    policy's only knob (segment size); cutoff/word-history are set to their
    neutral minima.
    """
    adapter = OracleAdapter(scenario.script())
    spec = adapter.spec()
    if audio is None:
        audio = scenario_audio(scenario, spec)
    vad_config = vad_config or VadConfig()
    segments = vad_segment(audio, vad_config, sample_rate=spec.sample_rate)

    emissions: list[Emission] = []
    records: list[EmissionRecord] = []
    chunk_samples = round(segment_size * spec.sample_rate)

    def to_frame(sample: int) -> int:
        return sample * spec.frame_rate // spec.sample_rate

    for seg_start, seg_end in segments:
        session = LaSession()
        pos = seg_start
        while pos < seg_end:
            pos = min(pos + chunk_samples, seg_end)
            hypothesis = adapter.tokens_in_window(to_frame(seg_start), to_frame(pos))
            outcome = la_step(session, hypothesis)
            committed = outcome.new_tokens
            if pos == seg_end:
                committed = committed + la_step(session, session.previous_hypothesis).new_tokens
            if committed:
                emission = Emission(
                    new_tokens=committed,
                    waveform=np.zeros(0, dtype=np.float32),
                    source_consumed_at_emit=pos / spec.sample_rate,
                )
                emissions.append(emission)
                records.append(_record(emission))

    duration = len(audio) / spec.sample_rate
    records.append(EmissionRecord(source_consumed_at_emit=duration, target_samples=0))
    _apply_delays(records, delays if delays is not None else scenario.delays_s)
    config = PolicyConfig(cutoff_frames=0, word_history=1, segment_size=segment_size)
    result = RunResult(
        emissions=records,
        source_duration=duration,
        config=config,
        policy="local-agreement",
        reference=scenario.reference_tokens(),
        finished=True,
    )
    return StreamRun(
        result=result,
        emissions=emissions,
        log_lines=[format_emission_line(i, e) for i, e in enumerate(emissions)],
    )


@dataclass
class SweepFailure:
    cell: tuple
    scenario_index: int
    error: str


def sweep(
    scenarios: list[Scenario],
    f_grid: list[int],
    wh_grid: list[int],
    segment_grid: list[float],
    policy: str = "simulu",
):
    """Cartesian product of the latency/memory knobs over a scenario set.

    Returns (rows, failures): one aggregated row per cell; failed cells are
    reported and skipped without aborting the sweep.
    """
    results: list[RunResult] = []
    failures: list[SweepFailure] = []
    for f in f_grid:
        for wh in wh_grid:
            for seg in segment_grid:
                for idx, scenario in enumerate(scenarios):
                    try:
                        if policy == "simulu":
                            config = PolicyConfig(cutoff_frames=f, word_history=wh,
                                                  segment_size=seg)
                            run = run_simulu(scenario, config)
                        elif policy == "local-agreement":
                            run = run_local_agreement(scenario, segment_size=seg)
                        else:
                            raise ValueError(f"unknown policy {policy!r}")
                        results.append(run.result)
                    except Exception as exc:
                        failures.append(SweepFailure((f, wh, seg), idx, str(exc)))
                        log.warning("sweep cell (%s,%s,%s) scenario %d failed: %s",
                                    f, wh, seg, idx, exc)
    return aggregate(results), failures
