#!/usr/bin/env python3
# Learn the dependency structure behind a power-telemetry table, read off
# the strongest influences on the target, and render the graph as dot.

from cfadvisor.causal import influence_summary, learn_dag
from cfadvisor.dataset import preprocess
from cfadvisor.synth import synth_dataset

ds = synth_dataset("pm100-like", 800, seed=2)
pre, _ = preprocess(ds)

raw = pre.unscale_matrix(pre.X)
graph = learn_dag(raw, pre.feature_names, pre.Y, pre.target_names)

print("learned feature order:", graph.feature_order)
print("\nedges (standardized / raw):")
for e in graph.edges:
    print(f"  {e.parent:>10} -> {e.child:<11} {e.weight:+.3f}  ({e.weight_raw:+.3f})")

target = pre.target_names[0]
print(f"\nstrongest influences on {target}:")
for row in influence_summary(graph, target):
    print(f"  {row['feature']:<11} weight {row['weight']:+.3f}")

print("\ngraphviz:")
print(graph.to_dot())
