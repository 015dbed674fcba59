"""End to end: plant an odd cluster structure, then embed a large tree in one colour.

Run: python demos/planted_pipeline.py
"""
from __future__ import annotations

import time

from tripartite_trees import gen_planted_host, random_tree, run_pipeline
from tripartite_trees.instances import gen_odd_template
from tripartite_trees.pipeline import planted_tree_size

template = gen_odd_template(6, seed=0)
host, partition = gen_planted_host(template, 1000, p=1.0, seed=0)
tree = random_tree(planted_tree_size(3, 1000, 0.5), 8, seed=0)
print(f"host: {sum(host.class_sizes)} vertices, tree: {tree.t} vertices, max degree {tree.max_degree}")

started = time.perf_counter()
result = run_pipeline(host, tree, {"mu": 0.5, "k": 6}, partition=partition, seed=0)
print(f"status {result.status} (exit {result.exit_code}) in {time.perf_counter() - started:.2f}s")

for name, stage in result.report["stages"].items():
    summary = {key: value for key, value in stage.items() if key not in ("violations", "state")}
    print(f"  {name}: {summary}")
print("checked inequalities:")
for check in result.report["inequalities"]:
    print(f"  {'ok ' if check['holds'] else 'NO '} {check['name']}: {check['lhs']} vs {check['rhs']}")
