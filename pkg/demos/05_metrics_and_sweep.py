"""Latency/quality accounting and the configuration sweep.

Run:  python demos/05_metrics_and_sweep.py
"""

import io

from simulstream import PolicyConfig, corpus_bleu, end_offset, start_offset
from simulstream.harness import run_simulu, sweep
from simulstream.metrics import write_csv
from simulstream.scenario import random_scenario

scenario = random_scenario(seed=12, min_duration_s=12, max_duration_s=16)

print("single run with injected compute delays:")
run = run_simulu(scenario, PolicyConfig(), delays=[0.04, 0.03, 0.02])
print(f"  StartOffset = {start_offset(run.result)} s "
      f"(source audio needed before the first output)")
print(f"  EndOffset   = {end_offset(run.result):.1f} ms "
      f"(lag after the stream ended, incl. injected delays)")
print(f"  BLEU        = {corpus_bleu([run.committed], [scenario.reference_tokens()]):.2f}\n")

print("sweep: latency knob f x memory knob WH (single scenario)")
rows, failures = sweep([scenario], f_grid=[2, 4, 6, 8], wh_grid=[5, 10], segment_grid=[0.5])
assert not failures
buffer = io.StringIO()
write_csv(rows, buffer)
print(buffer.getvalue())
