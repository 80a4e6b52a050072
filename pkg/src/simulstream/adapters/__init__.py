"""Model adapters: the contract, the synthetic oracle, and trace replay."""

from .base import Adapter, SynthesisOutput, TranscribeResult
from .oracle import OracleAdapter, OracleScript, OracleWord, unit_signature
from .trace import (
    ChunkEvent,
    RecordingAdapter,
    ReplayAdapter,
    ReplayCursor,
    SynthesizeEvent,
    Trace,
    TraceWriter,
    TranscribeEvent,
    read_trace,
    validate_trace,
    write_trace,
)

__all__ = [
    "Adapter",
    "ChunkEvent",
    "OracleAdapter",
    "OracleScript",
    "OracleWord",
    "RecordingAdapter",
    "ReplayAdapter",
    "ReplayCursor",
    "SynthesisOutput",
    "SynthesizeEvent",
    "Trace",
    "TraceWriter",
    "TranscribeEvent",
    "TranscribeResult",
    "read_trace",
    "unit_signature",
    "validate_trace",
    "write_trace",
]
