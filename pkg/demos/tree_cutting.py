"""Cut a random tree into small shrubs and show how the pieces fit together.

Run: python demos/tree_cutting.py
"""
from __future__ import annotations

from collections import Counter

from tripartite_trees import random_tree, s_cut

tree = random_tree(500, 5, seed=7)
print(f"tree on {tree.t} vertices, max degree {tree.max_degree}")

for granularity in (10, 40, 160):
    decomposition = s_cut(tree, granularity)
    sizes = [len(sh.vertices) for sh in decomposition.shrubs]
    print(
        f"S={granularity:3d}: cut size {len(decomposition.cut):3d} (limit {tree.t / granularity:.1f}), "
        f"{len(sizes)} shrubs, largest {max(sizes)}"
    )

# shrub size histogram at one granularity
decomposition = s_cut(tree, 40)
histogram = Counter(len(sh.vertices) // 10 * 10 for sh in decomposition.shrubs)
for bucket in sorted(histogram):
    print(f"  shrubs of size {bucket:2d}-{bucket + 9:2d}: {'#' * histogram[bucket]}")
