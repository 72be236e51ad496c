#!/usr/bin/env python3
# Start from a concrete job, pin one knob, and ask for a 20% faster run.
# Percent goals resolve against the model's prediction for the baseline.

from cfadvisor.query import execute_query, parse_query
from cfadvisor.synth import synth_dataset

ds = synth_dataset("sc19-like", 500, seed=7)

query = parse_query({
    "Type": "WhatIf",
    "Baseline": {"task_count": 300, "node_count": 8, "io_volume": 25.0},
    "Targets": {"run_time": "-20%"},
    "Constraints": {"node_count": "= 8"},   # hardware is not negotiable
})

result = execute_query(ds, query)
report = result.report

print("baseline prediction:",
      round(report["baseline"]["predictions"]["run_time"], 1))
print("goal resolves to run_time <=",
      round(report["generation"]["y_star"]["run_time"], 1))

for t in report["topk"]:
    print(f"\n#{t['rank']}  run_time {t['predictions']['run_time']:.0f}  "
          f"(node_count stays {t['features']['node_count']})")
    print("  ", t["explanation"])

if result.infeasible:
    print("\nno candidate met the goal under these constraints")
