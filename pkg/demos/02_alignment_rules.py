"""The four attention-driven decision rules, on a printable toy matrix.

Run:  python demos/02_alignment_rules.py
"""

import numpy as np

from simulstream import (
    history_cut_frame,
    row_argmax,
    stable_prefix_len,
    unit_history_boundary,
)

# four generated tokens attending over twelve source frames
attention = np.array([
    # frame:  0    1    2    3    4    5    6    7    8    9   10   11
    [0.05, 0.60, 0.20, 0.05, 0.02, 0.02, 0.02, 0.01, 0.01, 0.01, 0.005, 0.005],
    [0.02, 0.08, 0.15, 0.55, 0.10, 0.04, 0.02, 0.01, 0.01, 0.01, 0.005, 0.005],
    [0.01, 0.01, 0.02, 0.05, 0.10, 0.15, 0.50, 0.10, 0.03, 0.01, 0.01, 0.01],
    [0.01, 0.01, 0.01, 0.01, 0.02, 0.03, 0.05, 0.10, 0.16, 0.30, 0.20, 0.10],
])
attention /= attention.sum(axis=1, keepdims=True)

align = row_argmax(attention)
print("token -> frame argmax:", align.tolist())

total_frames = attention.shape[1]
for f in (0, 2, 4, 8):
    p = stable_prefix_len(align, total_frames, f)
    unstable = list(range(total_frames - f, total_frames))
    print(f"cutoff f={f}: unstable frames {unstable or 'none'} -> commit first {p} token(s)")

# word-history trim decided to discard the first two committed tokens
cut = history_cut_frame(align, discard_count=2)
print(f"\ndiscarding 2 oldest tokens -> speech history cut at frame {cut}")
print("   (just past the last discarded frame, clamped to retained tokens)")

# synthesized units attend back to the text history
unit_align = np.array([0, 0, 1, 1, 1, 2, 2, 3])
d = unit_history_boundary(unit_align, first_new_token=2)
print(f"\nunit->token alignment {unit_align.tolist()}, first new token = 2")
print(f"discard the first {d} units -> cut {d} * 320 = {d * 320} waveform samples")
