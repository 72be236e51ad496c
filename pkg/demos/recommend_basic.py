#!/usr/bin/env python3
# Ask for configurations that bring run_time under a cap, starting from a
# representative row of the dataset.

import json

from cfadvisor.query import execute_query, parse_query
from cfadvisor.synth import synth_dataset

ds = synth_dataset("sc19-like", 500, seed=7)

query = parse_query({
    "Type": "Recommend",
    "Targets": {"run_time": "< 500"},
    "Seeds": [0, 1],
})

result = execute_query(ds, query, on_phase=lambda p: print(f"... {p}"))
report = result.report

base = report["baseline"]
print("\nbaseline row:", json.dumps(base["features"], indent=2))
print("baseline prediction:", round(base["predictions"]["run_time"], 1))

print(f"\n{report['filtering']['n_surviving']} candidates survived filtering")
for t in report["topk"]:
    feats = {k: round(v, 2) if isinstance(v, float) else v
             for k, v in t["features"].items()}
    print(f"\n#{t['rank']}  score {t['score']:.3f}  "
          f"predicted run_time {t['predictions']['run_time']:.0f}")
    print("  ", feats)
    print("  ", t["explanation"])
