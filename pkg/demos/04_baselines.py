"""Baseline policies: LocalAgreement stepping and VAD stream segmentation.

Run:  python demos/04_baselines.py
"""

import numpy as np

from simulstream import LaSession, VadConfig, energy_voicing, la_step, vad_segment

print("LocalAgreement: commit the longest common prefix of consecutive decodes")
session = LaSession()
decodes = [
    ["the"],
    ["the", "cat"],
    ["the", "cat", "sat", "on"],
    ["the", "cat", "sat", "quietly"],
    ["the", "cat", "sat", "quietly", "down"],
]
for hypothesis in decodes:
    out = la_step(session, hypothesis)
    print(f"  decode={' '.join(hypothesis):<28} -> commit {out.new_tokens}")
print(f"  committed: {' '.join(session.committed)}\n")

print("VAD segmentation: tone bursts with silences, 30 ms energy windows")
sr = 16000
pieces = [(0.0, 6.0), (0.4, 0.6), (0.4, 5.0), (3.0, 7.0), (0.2, 4.0)]
stream = []
for gap, voiced in pieces:
    stream.append(np.zeros(round(gap * sr), dtype=np.float32))
    t = np.arange(round(voiced * sr)) / sr
    stream.append((0.4 * np.sin(2 * np.pi * 220 * t)).astype(np.float32))
stream = np.concatenate(stream)

cfg = VadConfig(voice_threshold=0.1, max_unvoiced=2.0, min_segment=4.0, max_segment=10.0)
segments = vad_segment(stream, cfg, detector=energy_voicing, sample_rate=sr)
print(f"  stream {len(stream) / sr:.1f} s -> {len(segments)} segments "
      f"(memory resets between them):")
for s, e in segments:
    print(f"    [{s / sr:6.2f}s, {e / sr:6.2f}s]  ({(e - s) / sr:.2f} s)")
