"""Buffer bookkeeping walk-through: absolute offsets survive front trims.

Run:  python demos/01_timeline_buffers.py
"""

import numpy as np

from simulstream import AdapterSpec, AudioChunk, SpeechHistory, frames_to_samples

spec = AdapterSpec()
print(f"rates: {spec.sample_rate} Hz audio, {spec.frame_rate} Hz frames, "
      f"{spec.reduction_rate} samples/unit")
print(f"one frame = {frames_to_samples(1, spec)} samples\n")

history = SpeechHistory(spec=spec)


def show(label):
    print(f"{label:<28} buffer={len(history.samples):>6} samples "
          f"({history.frames_in_buffer:>3} frames)  "
          f"start=frame {history.discarded_frames:<3} "
          f"absolute end=frame {history.total_frames}")


show("empty")
for k in range(4):
    chunk = AudioChunk(samples=np.zeros(8000, dtype=np.float32), duration=0.5)
    history.append_chunk(chunk)
    show(f"after chunk {k + 1} (0.5 s)")

# a policy decided frames [0, 40) belong to discarded text history
history.trim_front(40)
show("after trim_front(40)")

# absolute coordinates keep working: appending continues the same timeline
history.append_chunk(AudioChunk(samples=np.zeros(8000, dtype=np.float32), duration=0.5))
show("after one more chunk")

assert history.discarded_samples == frames_to_samples(history.discarded_frames, spec)
print("\ninvariant holds: discarded_samples == frames_to_samples(discarded_frames)")
