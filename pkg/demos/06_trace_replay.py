"""Record a run into a trace file, then replay it without the model.

Run:  python demos/06_trace_replay.py
"""

import tempfile
from pathlib import Path

from simulstream import PolicyConfig
from simulstream.adapters.trace import read_trace, validate_trace
from simulstream.harness import replay_stream, run_simulu
from simulstream.scenario import random_scenario

scenario = random_scenario(seed=4, min_duration_s=10, max_duration_s=14, noise_amp=0.02)
trace_path = Path(tempfile.mkdtemp()) / "session.jsonl"

live = run_simulu(scenario, PolicyConfig(), trace_path=trace_path)
print(f"recorded {trace_path.stat().st_size} bytes -> {trace_path}")

trace = read_trace(trace_path)
print(f"header spec: {trace.spec}")
print(f"metadata:    {trace.metadata}")

report = validate_trace(trace_path)
print("\nvalidation:")
print(report.summary())

replayed = replay_stream(trace)
identical = replayed.log_text() == live.log_text()
print(f"\nreplayed emission log byte-identical to the live run: {identical}")
for line in replayed.log_lines[:5]:
    print("  " + line)
print(f"  ... ({len(replayed.log_lines)} emissions total)")
