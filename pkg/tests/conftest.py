"""Shared fixtures and hand-scripted adapters for the test suite."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pytest

from simulstream.adapters.base import SynthesisOutput, TranscribeResult
from simulstream.adapters.oracle import OracleScript, OracleWord
from simulstream.timeline import AdapterSpec, AudioChunk, PolicyConfig


@pytest.fixture
def spec() -> AdapterSpec:
    return AdapterSpec()


@pytest.fixture
def config() -> PolicyConfig:
    return PolicyConfig(cutoff_frames=4, word_history=10, segment_size=0.5)


def chunk_of(duration: float, sample_rate: int = 16000, value: float = 0.0) -> AudioChunk:
    n = round(duration * sample_rate)
    return AudioChunk(samples=np.full(n, value, dtype=np.float32), duration=duration)


def word(start: int, end: int, tokens, units=None) -> OracleWord:
    tokens = tuple(tokens) if not isinstance(tokens, str) else (tokens,)
    if units is None:
        units = tuple(2 for _ in tokens)
    elif isinstance(units, int):
        units = (units,) * len(tokens)
    else:
        units = tuple(units)
    return OracleWord(start_frame=start, end_frame=end, tokens=tokens,
                      units_per_token=units)


def script_of(*words: OracleWord, **kwargs) -> OracleScript:
    return OracleScript(words=tuple(words), **kwargs)


@dataclass
class StubAdapter:
    """Plays back queued transcribe/synthesize results, in order."""

    adapter_spec: AdapterSpec = field(default_factory=AdapterSpec)
    transcribes: list[TranscribeResult] = field(default_factory=list)
    syntheses: list[SynthesisOutput] = field(default_factory=list)

    def spec(self) -> AdapterSpec:
        return self.adapter_spec

    def transcribe(self, speech, prefix) -> TranscribeResult:
        if not self.transcribes:
            raise AssertionError("stub adapter: no transcribe result queued")
        return self.transcribes.pop(0)

    def synthesize(self, text) -> SynthesisOutput:
        if not self.syntheses:
            raise AssertionError("stub adapter: no synthesis queued")
        return self.syntheses.pop(0)


def bump_attention(rows_cols: list[tuple[int, int]]) -> np.ndarray:
    """Row-normalized matrix with a 1.0 spike per (row, col) given."""
    rows = len(rows_cols)
    cols = max(c for _, c in rows_cols) + 1 if rows else 0
    m = np.full((rows, cols), 1e-9)
    for r, (row, col) in enumerate(rows_cols):
        assert row == r
        m[r, col] = 1.0
    return m / m.sum(axis=1, keepdims=True)


def spike_attention(cols: int, peaks: list[int]) -> np.ndarray:
    m = np.full((len(peaks), cols), 1e-9)
    for r, c in enumerate(peaks):
        m[r, c] = 1.0
    return m / m.sum(axis=1, keepdims=True)
