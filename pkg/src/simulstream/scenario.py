"""Declarative stream scenarios: script, source audio, references, delays.

A scenario file is a diff-friendly line format, one `key = value` pair per
line, `#` comments allowed. Frame-valued fields carry an explicit
``_frames`` suffix, second-valued keys a ``_s`` suffix:

    # toy stream
    duration_s = 12.0
    sharpness = 6.0
    noise_seed = 7
    noise_amp = 0.0
    delays_s = 0.0 0.05         # optional per-emission compute delays
    word = 10_frames 60_frames gut+en 2+3
    word = 60_frames 120_frames tag

One ``word`` line per source word: start frame, end frame, target tokens
joined by ``+``, optional unit counts joined by ``+`` (defaults derive
from a stable token hash). The scenario also fixes the deterministic
source waveform: a tone burst over every word span, silence elsewhere,
quantized to the 16-bit grid so WAV round-trips are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adapters.oracle import OracleScript, OracleWord, default_unit_count
from .timeline import AdapterSpec


@dataclass
class Scenario:
    words: list[OracleWord]
    duration_s: float
    sharpness: float = 6.0
    noise_seed: int = 0
    noise_amp: float = 0.0
    delays_s: list[float] = field(default_factory=list)
    reference: list[str] | None = None

    def script(self) -> OracleScript:
        return OracleScript(
            words=tuple(self.words),
            noise_seed=self.noise_seed,
            attention_sharpness=self.sharpness,
            noise_amp=self.noise_amp,
        )

    def reference_tokens(self) -> list[str]:
        if self.reference is not None:
            return list(self.reference)
        return [t for w in self.words for t in w.tokens]


class ScenarioError(ValueError):
    pass


def _parse_frames(text: str, line_no: int) -> int:
    if not text.endswith("_frames"):
        raise ScenarioError(f"line {line_no}: expected a _frames value, got {text!r}")
    return int(text[: -len("_frames")])


def _parse_word(value: str, line_no: int) -> OracleWord:
    parts = value.split()
    if len(parts) not in (3, 4):
        raise ScenarioError(
            f"line {line_no}: word needs 'start_frames end_frames tokens [units]'"
        )
    start = _parse_frames(parts[0], line_no)
    end = _parse_frames(parts[1], line_no)
    tokens = tuple(parts[2].split("+"))
    if len(parts) == 4:
        counts = tuple(int(c) for c in parts[3].split("+"))
        if len(counts) == 1 and len(tokens) > 1:
            counts = counts * len(tokens)
    else:
        counts = tuple(default_unit_count(t) for t in tokens)
    return OracleWord(start_frame=start, end_frame=end, tokens=tokens, units_per_token=counts)


def load_scenario(path) -> Scenario:
    fields: dict[str, str] = {}
    words: list[OracleWord] = []
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {line_no}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "word":
            words.append(_parse_word(value, line_no))
        else:
            fields[key] = value
    if "duration_s" not in fields:
        raise ScenarioError("missing duration_s")
    scenario = Scenario(
        words=words,
        duration_s=float(fields["duration_s"]),
        sharpness=float(fields.get("sharpness", 6.0)),
        noise_seed=int(fields.get("noise_seed", 0)),
        noise_amp=float(fields.get("noise_amp", 0.0)),
        delays_s=[float(x) for x in fields.get("delays_s", "").split()],
        reference=fields["reference"].split() if "reference" in fields else None,
    )
    scenario.script()  # validates spans/counts eagerly
    if scenario.words:
        last = scenario.words[-1].end_frame
        if last > round(scenario.duration_s * 50):
            raise ScenarioError(
                f"word spans extend to frame {last}, past the declared duration"
            )
    return scenario


def save_scenario(scenario: Scenario, path) -> None:
    lines = [f"duration_s = {scenario.duration_s!r}"]
    lines.append(f"sharpness = {scenario.sharpness!r}")
    lines.append(f"noise_seed = {scenario.noise_seed}")
    lines.append(f"noise_amp = {scenario.noise_amp!r}")
    if scenario.delays_s:
        lines.append("delays_s = " + " ".join(repr(d) for d in scenario.delays_s))
    if scenario.reference is not None:
        lines.append("reference = " + " ".join(scenario.reference))
    for w in scenario.words:
        units = "+".join(str(u) for u in w.units_per_token)
        lines.append(
            f"word = {w.start_frame}_frames {w.end_frame}_frames "
            f"{'+'.join(w.tokens)} {units}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def scenario_audio(scenario: Scenario, spec: AdapterSpec | None = None) -> np.ndarray:
    """Deterministic source waveform: one tone burst per word span.

    Values sit exactly on the 16-bit PCM grid, so writing to WAV and
    reading back reproduces the identical float32 stream.
    """
    spec = spec or AdapterSpec()
    n = round(scenario.duration_s * spec.sample_rate)
    pcm = np.zeros(n, dtype=np.int16)
    for i, w in enumerate(scenario.words):
        lo = w.start_frame * spec.sample_rate // spec.frame_rate
        hi = min(w.end_frame * spec.sample_rate // spec.frame_rate, n)
        t = np.arange(hi - lo) / spec.sample_rate
        freq = 110.0 + 13.0 * (i % 24)
        burst = 0.5 * np.sin(2.0 * np.pi * freq * t)
        pcm[lo:hi] = np.rint(burst * 32767).astype(np.int16)
    return pcm.astype(np.float32) / 32768.0


_VOCAB = (
    "an bei da ein fur gut hier ist ja kann lang mehr nun oft recht so dann "
    "und viel wohl zeit amt blick dorf ehre fluss geist haus insel jahr kraft "
    "licht meer nacht ort pfad quell raum stern turm ufer vogel wald zug berg "
    "feld gras hand kern luft mond"
).split()


def random_scenario(
    seed: int,
    min_duration_s: float = 10.0,
    max_duration_s: float = 60.0,
    segment_size: float = 0.5,
    noise_amp: float = 0.0,
    frame_rate: int = 50,
) -> Scenario:
    """Seeded scenario: ordered word spans with small gaps, 1-3 tokens/word.

    Word spans are at least one segment long, so a single chunk can never
    complete more words than any tested word-history bound. The declared
    duration is rounded up to whole segments past the last span.
    """
    rng = np.random.default_rng(seed)
    duration = float(rng.uniform(min_duration_s, max_duration_s))
    seg_frames = max(1, round(segment_size * frame_rate))
    words: list[OracleWord] = []
    cursor = int(rng.integers(2, 12))
    while True:
        span = int(rng.integers(seg_frames, round(1.5 * frame_rate) + 1))
        if (cursor + span) / frame_rate > duration:
            break
        n_tokens = int(rng.integers(1, 4))
        stem = _VOCAB[int(rng.integers(0, len(_VOCAB)))]
        if n_tokens == 1:
            tokens = (stem,)
        else:
            tokens = (stem,) + tuple(f"{stem}_{j}" for j in range(1, n_tokens))
        counts = tuple(default_unit_count(t) for t in tokens)
        words.append(
            OracleWord(
                start_frame=cursor,
                end_frame=cursor + span,
                tokens=tokens,
                units_per_token=counts,
            )
        )
        cursor += span + int(rng.integers(0, 16))
    if not words:  # degenerate duration draw; force one word
        words.append(
            OracleWord(start_frame=2, end_frame=2 + seg_frames + 5,
                       tokens=("wort",), units_per_token=(default_unit_count("wort"),))
        )
        cursor = words[-1].end_frame
    end_s = words[-1].end_frame / frame_rate
    n_segments = int(np.ceil(max(end_s, 1e-9) / segment_size))
    return Scenario(
        words=words,
        duration_s=n_segments * segment_size,
        sharpness=float(rng.uniform(3.0, 10.0)),
        noise_seed=seed,
        noise_amp=noise_amp,
    )
