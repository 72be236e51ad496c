#!/usr/bin/env python3
# Every surviving candidate carries a prediction interval from a bagged
# forest and an isolation score against the training distribution. The
# report keeps both; OutlierPolicy decides whether implausible points are
# merely penalized in the ranking or dropped outright.

from cfadvisor.query import execute_query, parse_query
from cfadvisor.synth import synth_dataset

ds = synth_dataset("sc19-like", 500, seed=7)


def run(policy):
    query = parse_query({
        "Type": "Recommend",
        "Targets": {"run_time": "< 400"},
        "Seeds": [4],
        "OutlierPolicy": policy,
    })
    return execute_query(ds, query)


soft = run("soft")
print("policy = soft")
for t in soft.report["topk"]:
    uq = t["uq"]
    print(f"  #{t['rank']} run_time {t['predictions']['run_time']:.0f}  "
          f"interval [{uq['lower']['run_time']:.0f}, "
          f"{uq['upper']['run_time']:.0f}]  "
          f"outlier score {t['outlier_score']:.2f}"
          + ("  OUTLIER" if t["is_outlier"] else ""))

hard = run("reject")
filt = hard.report["filtering"]
print(f"\npolicy = reject: {filt['n_rejected_outlier']} candidates dropped, "
      f"{filt['n_surviving']} kept")
for t in hard.report["topk"]:
    print(f"  #{t['rank']} outlier score {t['outlier_score']:.2f}")
