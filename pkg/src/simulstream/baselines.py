"""Cascade-side comparison policies: LocalAgreement and VAD segmentation.

LocalAgreement commits only the longest common prefix of two consecutive
full decodes, which makes commitments append-only by construction. The VAD
splitter turns a continuous stream into bounded segments at unvoiced
regions; long-form memory reset is realized by the caller constructing a
fresh session per segment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

VAD_WINDOW_S = 0.030  # fixed detector window


def longest_common_prefix(a: list[str], b: list[str]) -> list[str]:
    p = 0
    limit = min(len(a), len(b))
    while p < limit and a[p] == b[p]:
        p += 1
    return list(a[:p])


@dataclass
class LaSession:
    """State of one LocalAgreement stream (or VAD segment)."""

    previous_hypothesis: list[str] = field(default_factory=list)
    committed: list[str] = field(default_factory=list)
    source_consumed: float = 0.0


@dataclass
class LaOutcome:
    new_tokens: list[str]
    diverged: bool = False  # hypothesis contradicted already-committed text


def la_step(session: LaSession, new_hypothesis: list[str]) -> LaOutcome:
    """Commit the agreement between the previous and current full decode.

    Never retracts: if the new hypothesis diverges before the committed
    prefix, the committed text is kept and the divergence is reported.
    """
    agreed = longest_common_prefix(session.previous_hypothesis, new_hypothesis)
    done = len(session.committed)
    if len(agreed) < done:
        outcome = LaOutcome(new_tokens=[], diverged=True)
    else:
        fresh = agreed[done:]
        session.committed.extend(fresh)
        outcome = LaOutcome(new_tokens=fresh)
    session.previous_hypothesis = list(new_hypothesis)
    return outcome


@dataclass(frozen=True)
class VadConfig:
    voice_threshold: float = 0.1
    max_unvoiced: float = 20.0  # longest silence kept inside a segment, seconds
    min_segment: float = 15.0
    max_segment: float = 30.0

    def __post_init__(self):
        if not 0.0 <= self.voice_threshold <= 1.0:
            raise ConfigurationError("voice_threshold must be in [0, 1]")
        if not 0.0 < self.min_segment <= self.max_segment:
            raise ConfigurationError("need 0 < min_segment <= max_segment")
        if self.max_unvoiced < 0:
            raise ConfigurationError("max_unvoiced must be >= 0")


def energy_voicing(window: np.ndarray) -> float:
    """Detector stand-in: RMS energy through a fixed logistic, 0 at silence."""
    w = np.asarray(window, dtype=np.float64)
    if w.size == 0:
        raise ValueError("empty detector window")
    rms = float(np.sqrt(np.mean(w * w)))
    center, slope = 0.05, 0.02
    raw = 1.0 / (1.0 + np.exp(-(rms - center) / slope))
    floor = 1.0 / (1.0 + np.exp(center / slope))
    return float((raw - floor) / (1.0 - floor))


def _voiced_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """[start, end) window-index runs of consecutive voiced windows."""
    runs: list[tuple[int, int]] = []
    start = None
    for i, v in enumerate(mask):
        if v and start is None:
            start = i
        elif not v and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(mask)))
    return runs


def vad_segment(
    stream: np.ndarray,
    cfg: VadConfig,
    detector=energy_voicing,
    sample_rate: int = 16000,
) -> list[tuple[int, int]]:
    """Split a stream into ordered, disjoint voiced segments (sample spans).

    Rules, applied deterministically over fixed 30 ms detector windows:
    - a segment closes at the first unvoiced gap once it is at least
      ``min_segment`` long, and always when a gap exceeds ``max_unvoiced``;
    - shorter gaps are absorbed into the segment;
    - any segment reaching ``max_segment`` is hard-split there;
    - segment edges snap to voiced windows, so leading/trailing silence is
      never covered and appending silence leaves the result unchanged.
    """
    samples = np.asarray(stream, dtype=np.float32)
    win = max(1, round(VAD_WINDOW_S * sample_rate))
    n_windows = len(samples) // win
    if n_windows == 0:
        return []
    scores = np.array(
        [detector(samples[i * win:(i + 1) * win]) for i in range(n_windows)]
    )
    mask = scores >= cfg.voice_threshold
    runs = [(s * win, e * win) for s, e in _voiced_runs(mask)]
    if not runs:
        return []

    max_seg = round(cfg.max_segment * sample_rate)
    min_seg = round(cfg.min_segment * sample_rate)
    max_gap = round(cfg.max_unvoiced * sample_rate)

    segments: list[tuple[int, int]] = []

    def hard_split(start: int, end: int) -> int:
        while end - start > max_seg:
            segments.append((start, start + max_seg))
            start += max_seg
        return start

    cur_start, cur_end = runs[0]
    cur_start = hard_split(cur_start, cur_end)
    for run_start, run_end in runs[1:]:
        gap = run_start - cur_end
        if gap > max_gap or (cur_end - cur_start) >= min_seg:
            if cur_end > cur_start:
                segments.append((cur_start, cur_end))
            cur_start, cur_end = run_start, run_end
        else:
            cur_end = run_end
        cur_start = hard_split(cur_start, cur_end)
    if cur_end > cur_start:
        segments.append((cur_start, cur_end))
    return segments
