"""The attention-guided six-step streaming loop ("simulu" policy).

Per ingested chunk the session: (1) appends audio to the speech history,
(2) asks the adapter for a new-token hypothesis over the whole buffered
speech with the retained text history as prefix context, (3) commits the
hypothesis prefix whose tokens align only to stable frames, (4) trims both
text history (to the word-history bound, whole words only) and speech
history (at the cut frame implied by the discarded tokens' alignments),
(5) synthesizes the whole retained text history, and (6) emits only the
waveform tail belonging to the newly committed tokens, found through the
text-unit attention and the unit reduction rate.

Committed history is immutable: stability is judged on new tokens only and
nothing already emitted is ever revised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .alignment import (
    history_cut_frame,
    row_argmax,
    stable_prefix_len,
    unit_history_boundary,
    validate_attention,
)
from .errors import ConfigurationError, ContractViolation, StateError
from .timeline import AdapterSpec, AudioChunk, PolicyConfig, SpeechHistory


@dataclass
class TextHistory:
    """Committed tokens with word boundaries and commit-time alignments.

    ``token_frame_align`` records each token's argmax encoder frame in
    absolute coordinates at commit time (not necessarily monotone).
    ``discarded_tokens`` counts tokens trimmed off the front since stream
    start, so absolute token positions survive word-history cuts.
    """

    tokens: list[str] = field(default_factory=list)
    word_start_flags: list[bool] = field(default_factory=list)
    token_frame_align: list[int] = field(default_factory=list)
    discarded_tokens: int = 0

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def word_count(self) -> int:
        return sum(self.word_start_flags)

    @property
    def total_committed(self) -> int:
        """Absolute count of tokens ever committed (retained + trimmed)."""
        return self.discarded_tokens + len(self.tokens)

    def extend(self, tokens: list[str], flags: list[bool], aligns: list[int]) -> None:
        if not (len(tokens) == len(flags) == len(aligns)):
            raise ValueError("tokens, flags and aligns must have equal length")
        self.tokens.extend(tokens)
        self.word_start_flags.extend(flags)
        self.token_frame_align.extend(aligns)

    def drop_front(self, count: int) -> None:
        if count < 0 or count > len(self.tokens):
            raise ValueError("drop count out of range")
        del self.tokens[:count]
        del self.word_start_flags[:count]
        del self.token_frame_align[:count]
        self.discarded_tokens += count

    def word_start_positions(self) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.word_start_flags, dtype=bool))


@dataclass
class Emission:
    """One committed output event."""

    new_tokens: list[str]
    waveform: np.ndarray  # float32, length multiple of reduction_rate
    source_consumed_at_emit: float  # seconds


@dataclass
class StreamSession:
    """Live state of one long-form translation."""

    config: PolicyConfig
    adapter: object  # Adapter
    spec: AdapterSpec = field(init=False)
    speech: SpeechHistory = field(init=False)
    text: TextHistory = field(default_factory=TextHistory)
    emitted_units_total: int = 0
    source_consumed: float = 0.0
    samples_pushed: int = 0
    chunks_ingested: int = 0
    finished: bool = False

    def __post_init__(self):
        spec = self.adapter.spec()
        if not isinstance(spec, AdapterSpec):
            raise ConfigurationError("adapter.spec() must return an AdapterSpec")
        self.spec = spec
        self.speech = SpeechHistory(spec=spec)

    # -- step 1 ------------------------------------------------------------

    def push_audio(self, chunk: AudioChunk) -> "StreamSession":
        if self.finished:
            raise StateError("push_audio after finish")
        self.speech.append_chunk(chunk)
        self.samples_pushed += len(chunk.samples)
        self.chunks_ingested += 1
        # recomputed from the integer sample count so repeated pushes do not
        # accumulate float error
        self.source_consumed = self.samples_pushed / self.spec.sample_rate
        return self

    # -- steps 2..6 ----------------------------------------------------------

    def step(self, cutoff_override: int | None = None) -> Emission | None:
        """Run one hypothesize/stabilize/trim/synthesize/emit cycle.

        Returns None when no new token is stable yet (read more). The
        ``cutoff_override`` is used by finish() to treat all frames stable.
        """
        if self.finished:
            raise StateError("step after finish")
        if self.chunks_ingested == 0:
            raise StateError("step before any audio was pushed")
        f = self.config.cutoff_frames if cutoff_override is None else cutoff_override

        # step 2: hypothesis over the whole buffered speech, prefix-aware
        result = self.adapter.transcribe(self.speech, self.text)
        frames = self.speech.frames_in_buffer
        attn = validate_attention(result.attention)
        if attn.shape[0] != len(result.new_tokens):
            raise ContractViolation(
                f"attention rows {attn.shape[0]} != new tokens {len(result.new_tokens)}"
            )
        if attn.shape[0] > 0 and attn.shape[1] != frames:
            raise ContractViolation(
                f"attention cols {attn.shape[1]} != buffered frames {frames}"
            )
        if len(result.word_start_flags) != len(result.new_tokens):
            raise ContractViolation("word_start_flags length != new tokens")

        # step 3: stable prefix of the new tokens only
        align = row_argmax(attn)
        p = stable_prefix_len(align, frames, f)
        if p == 0:
            return None

        committed = list(result.new_tokens[:p])
        flags = list(result.word_start_flags[:p])
        abs_align = [int(a) + self.speech.discarded_frames for a in align[:p]]
        self.text.extend(committed, flags, abs_align)

        # step 4: bound the text history, cut the matching speech
        self.trim()

        # step 5: synthesize the whole retained text history
        synth = self.adapter.synthesize(self.text)
        unit_attn = validate_attention(synth.attention)
        if unit_attn.shape[0] != len(synth.units):
            raise ContractViolation(
                f"unit attention rows {unit_attn.shape[0]} != units {len(synth.units)}"
            )
        if unit_attn.shape[0] > 0 and unit_attn.shape[1] != len(self.text.tokens):
            raise ContractViolation(
                f"unit attention cols {unit_attn.shape[1]} != history tokens {len(self.text.tokens)}"
            )
        waveform = np.asarray(synth.waveform, dtype=np.float32)
        if len(waveform) != len(synth.units) * self.spec.reduction_rate:
            raise ContractViolation(
                "waveform length must be units * reduction_rate "
                f"({len(waveform)} != {len(synth.units)} * {self.spec.reduction_rate})"
            )

        # step 6: drop units belonging to the pre-existing history
        first_new = max(0, len(self.text.tokens) - p)
        d = unit_history_boundary(row_argmax(unit_attn), first_new)
        emitted = waveform[d * self.spec.reduction_rate:]
        self.emitted_units_total += len(synth.units) - d
        return Emission(
            new_tokens=committed,
            waveform=emitted,
            source_consumed_at_emit=self.source_consumed,
        )

    def trim(self) -> "StreamSession":
        """Enforce the word-history bound and cut the aligned speech front.

        Discards whole oldest words until ``word_history`` words remain;
        the speech cut is computed from the pre-trim alignments, clamped so
        no retained token's aligned frame is dropped.
        """
        words = self.text.word_count
        wh = self.config.word_history
        if words <= wh:
            return self
        starts = self.text.word_start_positions()
        discard_count = int(starts[words - wh])  # first retained word's start token
        if discard_count == 0:
            return self
        cut = history_cut_frame(
            np.asarray(self.text.token_frame_align, dtype=np.int64), discard_count
        )
        if cut > self.speech.discarded_frames:
            self.speech.trim_front(cut)
        self.text.drop_front(discard_count)
        return self

    def finish(self) -> list[Emission]:
        """Flush the stream: one final step with every frame treated stable."""
        if self.finished:
            raise StateError("finish called twice")
        emissions: list[Emission] = []
        if self.chunks_ingested > 0:
            emission = self.step(cutoff_override=0)
            if emission is not None:
                emissions.append(emission)
        self.finished = True
        return emissions


def new_session(config: PolicyConfig, adapter) -> StreamSession:
    """Fresh session with empty histories and zero offsets."""
    if not isinstance(config, PolicyConfig):
        raise ConfigurationError("config must be a PolicyConfig")
    return StreamSession(config=config, adapter=adapter)
