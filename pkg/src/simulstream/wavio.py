"""Minimal WAV support: 16-bit PCM, mono. Anything else is rejected."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np


def write_wav(path, samples: np.ndarray, sample_rate: int) -> None:
    """Write mono float32 [-1, 1] samples as 16-bit PCM."""
    pcm = np.clip(np.rint(np.asarray(samples, dtype=np.float64) * 32768.0), -32768, 32767)
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(sample_rate)
        fh.writeframes(pcm.astype("<i2").tobytes())


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a 16-bit PCM mono WAV file into float32 samples plus its rate."""
    path = Path(path)
    with wave.open(str(path), "rb") as fh:
        if fh.getnchannels() != 1:
            raise ValueError(f"{path}: only mono WAV is supported")
        if fh.getsampwidth() != 2:
            raise ValueError(f"{path}: only 16-bit PCM WAV is supported")
        if fh.getcomptype() != "NONE":
            raise ValueError(f"{path}: compressed WAV is not supported")
        raw = fh.readframes(fh.getnframes())
        rate = fh.getframerate()
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32768.0
    return samples, rate
