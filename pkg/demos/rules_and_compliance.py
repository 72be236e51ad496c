#!/usr/bin/env python3
# Domain rules filter the candidate set. Statistical mining happens by
# default; user rules ride along and are validated the same way. Rules
# that do not hold on enough training rows are rejected with a reason.

from cfadvisor.query import execute_query, parse_query
from cfadvisor.synth import synth_dataset

ds = synth_dataset("sc19-like", 500, seed=7)

query = parse_query({
    "Type": "Recommend",
    "Targets": {"run_time": "< 500"},
    "Seeds": [3],
    "Rules": [
        {"name": "tasks_per_node",
         "expression": "task_count / node_count >= 4",
         "explanation": "below four tasks per node the fabric idles"},
        {"name": "never_holds", "expression": "io_volume > 1e9"},
    ],
})

result = execute_query(ds, query)
rules = result.report["rules"]

print("kept rules:")
for r in rules["kept"]:
    print(f"  {r['name']:<22} coverage {r['coverage']:.2f}  [{r['source']}]")
    print(f"    {r['expression']}")

print("\nrejected rules:")
for r in rules["rejected"]:
    print(f"  {r['name']:<22} {r['reason']}")

filt = result.report["filtering"]
print(f"\ncandidates rejected for compliance: {filt['n_rejected_compliance']}")
print(f"candidates surviving: {filt['n_surviving']}")
for t in result.report["topk"][:3]:
    c = t["compliance"]
    print(f"  #{t['rank']} compliance {c['score']:.2f} violated: {c['violated']}")
