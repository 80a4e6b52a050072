"""simulstream: training-free streaming policies for long-form speech translation.

The engine is model-agnostic: policies consume attention matrices and
token/unit streams through a small adapter contract, so every decision
rule is exactly testable against a deterministic synthetic oracle and
recorded real-model traces.
"""

from .alignment import (
    history_cut_frame,
    row_argmax,
    stable_prefix_len,
    unit_history_boundary,
)
from .baselines import LaSession, VadConfig, energy_voicing, la_step, longest_common_prefix, vad_segment
from .metrics import EmissionRecord, RunResult, aggregate, corpus_bleu, end_offset, start_offset
from .policy import Emission, StreamSession, TextHistory, new_session
from .timeline import AdapterSpec, AudioChunk, PolicyConfig, SpeechHistory, frames_to_samples

__version__ = "0.1.0"

__all__ = [
    "AdapterSpec",
    "AudioChunk",
    "Emission",
    "EmissionRecord",
    "LaSession",
    "PolicyConfig",
    "RunResult",
    "SpeechHistory",
    "StreamSession",
    "TextHistory",
    "VadConfig",
    "aggregate",
    "corpus_bleu",
    "end_offset",
    "energy_voicing",
    "frames_to_samples",
    "history_cut_frame",
    "la_step",
    "longest_common_prefix",
    "new_session",
    "row_argmax",
    "stable_prefix_len",
    "start_offset",
    "unit_history_boundary",
    "vad_segment",
]
