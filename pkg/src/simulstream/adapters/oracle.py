"""Deterministic synthetic adapter: the ground truth for policy tests.

An OracleScript fixes, ahead of time, which source frame span produces
which target tokens and how many discrete units each token expands to.
The adapter then behaves like a perfectly consistent S2ST model:

- transcribe emits the script's token stream in order, as soon as a
  token's source sub-span has been fully heard, skipping everything the
  session has already committed (tracked through the text history's
  absolute token offset). Attention rows are normalized bumps centered in
  the token's true sub-span, with optional seeded in-span noise, so the
  per-row argmax always lands inside the scripted span.
- synthesize expands each history token into its scripted units; every
  unit id owns a fixed 320-sample waveform signature, making synthesis a
  pure function of the token sequence. Unit rows attend one-hot to their
  generating token.

Determinism: same script + same call sequence => bitwise-identical output.
Noise is drawn from a counter-keyed generator, so the k-th transcribe call
sees the same noise regardless of policy configuration.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from ..policy import TextHistory
from ..timeline import AdapterSpec, SpeechHistory
from .base import SynthesisOutput, TranscribeResult

UNIT_VOCAB = 4096


@dataclass(frozen=True)
class OracleWord:
    """One scripted source word: frame span, target tokens, units per token."""

    start_frame: int
    end_frame: int
    tokens: tuple[str, ...]
    units_per_token: tuple[int, ...]

    def __post_init__(self):
        if self.end_frame <= self.start_frame:
            raise ConfigurationError("word span must be non-empty")
        if not self.tokens:
            raise ConfigurationError("word must carry at least one token")
        if len(self.units_per_token) != len(self.tokens):
            raise ConfigurationError("units_per_token must match tokens")
        if any(u < 1 for u in self.units_per_token):
            raise ConfigurationError("unit counts must be positive")
        if self.end_frame - self.start_frame < len(self.tokens):
            raise ConfigurationError("word span too short for its token count")


@dataclass(frozen=True)
class OracleScript:
    words: tuple[OracleWord, ...]
    noise_seed: int = 0
    attention_sharpness: float = 6.0
    noise_amp: float = 0.0

    def __post_init__(self):
        if self.attention_sharpness <= 0:
            raise ConfigurationError("attention_sharpness must be positive")
        if self.noise_amp < 0:
            raise ConfigurationError("noise_amp must be >= 0")
        prev_end = None
        for w in self.words:
            if prev_end is not None and w.start_frame < prev_end:
                raise ConfigurationError("word spans must be ordered and non-overlapping")
            prev_end = w.end_frame
        # the same token string must always expand to the same unit count,
        # otherwise synthesis would not be a function of the token sequence
        counts: dict[str, int] = {}
        for w in self.words:
            for tok, n in zip(w.tokens, w.units_per_token):
                if counts.setdefault(tok, n) != n:
                    raise ConfigurationError(
                        f"token {tok!r} declared with conflicting unit counts"
                    )

    @property
    def end_frame(self) -> int:
        return self.words[-1].end_frame if self.words else 0

    def token_stream(self) -> list[str]:
        return [t for w in self.words for t in w.tokens]


def default_unit_count(token: str) -> int:
    """Stable per-token unit count in 1..4 (used when a script omits counts)."""
    return zlib.crc32(token.encode()) % 4 + 1


def token_unit_ids(token: str, count: int) -> tuple[int, ...]:
    return tuple(
        zlib.crc32(f"{token}/{j}".encode()) % UNIT_VOCAB for j in range(count)
    )


_signature_cache: dict[tuple[int, int], np.ndarray] = {}


def unit_signature(unit_id: int, reduction_rate: int, sample_rate: int) -> np.ndarray:
    """Fixed waveform for one unit id: a faded sine, float32, reduction_rate samples."""
    key = (unit_id, reduction_rate)
    sig = _signature_cache.get(key)
    if sig is None:
        t = np.arange(reduction_rate) / sample_rate
        freq = 60.0 + (unit_id % 512) * 14.0
        phase = (unit_id * 0.618034) % 1.0 * 2.0 * np.pi
        wave = 0.25 * np.sin(2.0 * np.pi * freq * t + phase)
        fade = min(16, reduction_rate // 4)
        if fade:
            ramp = np.linspace(0.0, 1.0, fade)
            wave[:fade] *= ramp
            wave[-fade:] *= ramp[::-1]
        sig = wave.astype(np.float32)
        sig.flags.writeable = False
        _signature_cache[key] = sig
    return sig


@dataclass(frozen=True)
class _FlatToken:
    """One script token with its source sub-span (absolute frames)."""

    text: str
    word_start: bool
    start_frame: int
    end_frame: int
    unit_ids: tuple[int, ...]

    @property
    def center(self) -> int:
        return (self.start_frame + self.end_frame - 1) // 2


def _flatten(script: OracleScript) -> list[_FlatToken]:
    flat: list[_FlatToken] = []
    for w in script.words:
        span = w.end_frame - w.start_frame
        k = len(w.tokens)
        # split the word span into k ordered sub-spans, one per token
        edges = [w.start_frame + round(j * span / k) for j in range(k + 1)]
        for j, (tok, n) in enumerate(zip(w.tokens, w.units_per_token)):
            flat.append(
                _FlatToken(
                    text=tok,
                    word_start=(j == 0),
                    start_frame=edges[j],
                    end_frame=edges[j + 1],
                    unit_ids=token_unit_ids(tok, n),
                )
            )
    return flat


class OracleAdapter:
    """Scripted deterministic model adapter."""

    def __init__(self, script: OracleScript, spec: AdapterSpec | None = None):
        self.script = script
        self._spec = spec or AdapterSpec()
        self._flat = _flatten(script)
        self._units_by_token = {t.text: t.unit_ids for t in self._flat}
        self._transcribe_calls = 0

    def spec(self) -> AdapterSpec:
        return self._spec

    # -- speech side ---------------------------------------------------------

    def transcribe(self, speech: SpeechHistory, prefix: TextHistory) -> TranscribeResult:
        cols = speech.frames_in_buffer
        if cols <= 0:
            raise ValueError("speech history is empty")
        off = speech.discarded_frames
        end = speech.total_frames

        committed = prefix.total_committed
        new: list[_FlatToken] = []
        for tok in self._flat[committed:]:
            if tok.end_frame > end:
                break
            if tok.start_frame < off:
                # a not-yet-committed token's audio was trimmed away; the
                # policy's clamped history cut is supposed to make this
                # impossible
                raise RuntimeError(
                    f"oracle token {tok.text!r} span starts before the buffer"
                )
            new.append(tok)

        call_index = self._transcribe_calls
        self._transcribe_calls += 1
        rng = np.random.default_rng([self.script.noise_seed, call_index])

        attn = np.zeros((len(new), cols), dtype=np.float64)
        col_abs = off + np.arange(cols)
        for i, tok in enumerate(new):
            halfwidth = max((tok.end_frame - tok.start_frame) / 2.0, 1.0)
            row = np.exp(
                -self.script.attention_sharpness
                * ((col_abs - tok.center) / halfwidth) ** 2
            )
            if self.script.noise_amp > 0:
                lo, hi = tok.start_frame - off, tok.end_frame - off
                row[lo:hi] += rng.uniform(0.0, self.script.noise_amp, hi - lo)
            attn[i] = row / row.sum()

        return TranscribeResult(
            new_tokens=[t.text for t in new],
            word_start_flags=[t.word_start for t in new],
            attention=attn,
        )

    # -- text side -------------------------------------------------------------

    def synthesize(self, text: TextHistory) -> SynthesisOutput:
        return self.synthesize_tokens(text.tokens)

    def synthesize_tokens(self, tokens: list[str]) -> SynthesisOutput:
        """Offline synthesis of an arbitrary token sequence (pure function)."""
        if not tokens:
            raise ValueError("text history is empty")
        units: list[int] = []
        owner: list[int] = []
        for i, tok in enumerate(tokens):
            ids = self._units_by_token.get(tok)
            if ids is None:
                raise ValueError(f"token {tok!r} is not in the oracle script")
            units.extend(ids)
            owner.extend([i] * len(ids))
        attn = np.zeros((len(units), len(tokens)), dtype=np.float64)
        attn[np.arange(len(units)), owner] = 1.0
        waveform = np.concatenate(
            [
                unit_signature(u, self._spec.reduction_rate, self._spec.sample_rate)
                for u in units
            ]
        )
        return SynthesisOutput(units=units, attention=attn, waveform=waveform)

    # -- helpers for tests and the LocalAgreement runner ------------------------

    def token_centers(self) -> list[int]:
        return [t.center for t in self._flat]

    def token_spans(self) -> list[tuple[int, int]]:
        return [(t.start_frame, t.end_frame) for t in self._flat]

    def tokens_in_window(self, start_frame: int, end_frame: int) -> list[str]:
        """Full decode of one audio window: tokens of words lying inside it."""
        out: list[str] = []
        for w in self.script.words:
            if w.start_frame >= start_frame and w.end_frame <= end_frame:
                out.extend(w.tokens)
        return out
