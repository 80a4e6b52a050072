"""Time and buffer bookkeeping shared by all policies.

Conventions used throughout the engine:

- Audio is mono float32 in [-1, 1].
- Absolute indices (samples or encoder frames counted from stream start)
  are the canonical coordinate system. Buffer-relative indices are derived
  by subtracting the discarded-front offsets kept here, so latency metrics
  and history cuts survive front trims.
- Frame <-> sample conversion rounds to nearest. When ``frame_rate``
  divides ``sample_rate`` (16 kHz audio over 50 Hz frames) the conversion
  is exact and additive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class AdapterSpec:
    """Fixed rates a model adapter exposes to the engine.

    ``reduction_rate`` is the number of waveform samples one discrete
    speech unit expands to; consistency with the unit rate is enforced.
    """

    sample_rate: int = 16000  # samples/second, source and target
    frame_rate: int = 50      # encoder frames/second seen by speech-text attention
    unit_rate: int = 50       # discrete units/second
    reduction_rate: int = 320  # waveform samples per unit

    def __post_init__(self):
        for name in ("sample_rate", "frame_rate", "unit_rate", "reduction_rate"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be strictly positive")
        if self.reduction_rate * self.unit_rate != self.sample_rate:
            raise ConfigurationError(
                "reduction_rate * unit_rate must equal sample_rate "
                f"({self.reduction_rate} * {self.unit_rate} != {self.sample_rate})"
            )


@dataclass(frozen=True)
class PolicyConfig:
    """Streaming policy knobs.

    cutoff_frames: trailing encoder frames treated as unstable (latency knob).
    word_history: words retained in the committed text history (memory knob).
    segment_size: seconds of audio ingested per chunk.
    """

    cutoff_frames: int = 4
    word_history: int = 10
    segment_size: float = 0.5

    def __post_init__(self):
        if self.cutoff_frames < 0:
            raise ConfigurationError("cutoff_frames must be >= 0")
        if self.word_history < 1:
            raise ConfigurationError("word_history must be >= 1")
        if not self.segment_size > 0:
            raise ConfigurationError("segment_size must be > 0")


def frames_to_samples(frames: int, spec: AdapterSpec) -> int:
    """Number of samples spanned by ``frames`` encoder frames (rounded to nearest)."""
    if frames < 0:
        raise ValueError("frames must be >= 0")
    num = frames * spec.sample_rate
    if num % spec.frame_rate == 0:
        return num // spec.frame_rate
    return round(num / spec.frame_rate)


@dataclass
class AudioChunk:
    """One ingested piece of the source stream."""

    samples: np.ndarray  # float32, shape (n,)
    duration: float      # seconds (the speech segment size)

    @classmethod
    def from_samples(cls, samples: np.ndarray, sample_rate: int) -> "AudioChunk":
        samples = np.asarray(samples, dtype=np.float32)
        return cls(samples=samples, duration=len(samples) / sample_rate)

    def validate(self, sample_rate: int) -> None:
        if self.samples.ndim != 1:
            raise ValueError("chunk samples must be 1-D")
        expected = round(self.duration * sample_rate)
        if len(self.samples) != expected:
            raise ValueError(
                f"chunk length {len(self.samples)} != round(duration * sample_rate) = {expected}"
            )
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("chunk contains non-finite amplitudes")


@dataclass
class SpeechHistory:
    """Growable speech buffer with absolute front offsets.

    The buffer start always sits at absolute frame ``discarded_frames``;
    ``discarded_samples == frames_to_samples(discarded_frames)`` is kept
    exact by recomputing the sample offset from the frame offset on trim.
    """

    spec: AdapterSpec
    samples: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.float32))
    discarded_frames: int = 0
    discarded_samples: int = 0

    def append_chunk(self, chunk: AudioChunk) -> "SpeechHistory":
        chunk.validate(self.spec.sample_rate)
        self.samples = np.concatenate([self.samples, chunk.samples])
        return self

    @property
    def frames_in_buffer(self) -> int:
        """Complete encoder frames currently held (partial tail frames excluded)."""
        return (len(self.samples) * self.spec.frame_rate) // self.spec.sample_rate

    @property
    def total_frames(self) -> int:
        """Absolute frame index just past the buffered audio."""
        return self.discarded_frames + self.frames_in_buffer

    @property
    def total_samples(self) -> int:
        """Total samples ever appended (buffer + trimmed front)."""
        return self.discarded_samples + len(self.samples)

    def trim_front(self, cut_frame: int) -> "SpeechHistory":
        """Drop all audio before absolute frame ``cut_frame``.

        Idempotent at the same cut frame; raises on cuts outside
        [discarded_frames, total_frames].
        """
        if cut_frame < self.discarded_frames:
            raise ValueError(
                f"cut_frame {cut_frame} precedes buffer start {self.discarded_frames}"
            )
        if cut_frame > self.total_frames:
            raise ValueError(
                f"cut_frame {cut_frame} beyond buffered frames {self.total_frames}"
            )
        new_offset = frames_to_samples(cut_frame, self.spec)
        drop = new_offset - self.discarded_samples
        self.samples = self.samples[drop:]
        self.discarded_frames = cut_frame
        self.discarded_samples = new_offset
        return self
