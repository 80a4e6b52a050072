"""Full six-step streaming session over a scripted stream.

Shows per-chunk decisions (read vs. write), history trims, and writes the
emitted target speech to demo_out.wav next to this script.

Run:  python demos/03_streaming_session.py
"""

from pathlib import Path

import numpy as np

from simulstream import PolicyConfig, new_session
from simulstream.adapters.oracle import OracleAdapter
from simulstream.harness import iter_chunks
from simulstream.scenario import random_scenario, scenario_audio
from simulstream.wavio import write_wav

scenario = random_scenario(seed=8, min_duration_s=12, max_duration_s=16)
adapter = OracleAdapter(scenario.script())
config = PolicyConfig(cutoff_frames=4, word_history=6, segment_size=0.5)
session = new_session(config, adapter)

audio = scenario_audio(scenario)
print(f"stream: {scenario.duration_s} s, {len(scenario.words)} source words, "
      f"f={config.cutoff_frames}, WH={config.word_history}\n")

emitted = []
for chunk in iter_chunks(audio, config.segment_size, adapter.spec().sample_rate):
    session.push_audio(chunk)
    emission = session.step()
    t = session.source_consumed
    if emission is None:
        print(f"t={t:5.1f}s  read   (buffer {session.speech.frames_in_buffer} frames, "
              f"history {session.text.word_count} words)")
    else:
        emitted.append(emission.waveform)
        print(f"t={t:5.1f}s  WRITE  {' '.join(emission.new_tokens):<24} "
              f"+{len(emission.waveform)} samples, "
              f"buffer starts at frame {session.speech.discarded_frames}")

for emission in session.finish():
    emitted.append(emission.waveform)
    print(f"flush    WRITE  {' '.join(emission.new_tokens)} "
          f"+{len(emission.waveform)} samples")

out = np.concatenate(emitted)
target = Path(__file__).with_name("demo_out.wav")
write_wav(target, out, adapter.spec().sample_rate)
print(f"\nemitted {len(out)} samples ({len(out) / 16000:.2f} s) -> {target.name}")
print(f"committed text: {' '.join(t for t in session.text.tokens)} (last "
      f"{session.text.word_count} words retained)")
