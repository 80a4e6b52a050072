"""Model-adapter contract.

An adapter hides a concrete S2ST model (or a stand-in) behind three calls:
report fixed rates, transcribe the current speech history into new tokens
with speech-text attention, and synthesize units + waveform for a text
history with text-unit attention. The engine never looks past this surface.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from ..timeline import AdapterSpec, SpeechHistory


@dataclass
class TranscribeResult:
    """New-token hypothesis for the current speech history.

    ``attention`` has one row per new token and one column per encoder
    frame currently buffered (column j is absolute frame
    ``speech.discarded_frames + j``).
    """

    new_tokens: list[str]
    word_start_flags: list[bool]
    attention: np.ndarray  # shape (len(new_tokens), frames_in_buffer)


@dataclass
class SynthesisOutput:
    """Units, text-unit attention and waveform for a whole text history.

    ``attention`` has one row per unit and one column per history token;
    ``waveform`` is float32 with exactly ``len(units) * reduction_rate``
    samples.
    """

    units: list[int]
    attention: np.ndarray  # shape (len(units), len(text.tokens))
    waveform: np.ndarray   # float32


@runtime_checkable
class Adapter(Protocol):
    """What a model must provide to drive the streaming policies."""

    def spec(self) -> AdapterSpec:
        ...

    def transcribe(self, speech: SpeechHistory, prefix: "TextHistory") -> TranscribeResult:
        ...

    def synthesize(self, text: "TextHistory") -> SynthesisOutput:
        ...


def check_tokens_flags(tokens: Sequence[str], flags: Sequence[bool]) -> None:
    if len(tokens) != len(flags):
        raise ValueError("word_start_flags length must match tokens")
