"""Trees, S-cuts, shrubs and the order in which the embedder visits vertices."""
from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BadArguments, Infeasible


class Tree:
    """Unlabelled tree on vertices ``0..t-1``, rooted at 0 for ``parent``."""

    def __init__(self, t: int, edges: Iterable[tuple[int, int]]):
        t = int(t)
        if t < 1:
            raise BadArguments("a tree needs at least one vertex")
        adj: list[list[int]] = [[] for _ in range(t)]
        count = 0
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < t and 0 <= v < t) or u == v:
                raise BadArguments(f"bad tree edge {u}-{v}")
            adj[u].append(v)
            adj[v].append(u)
            count += 1
        if count != t - 1:
            raise BadArguments(f"{t} vertices need {t - 1} edges, got {count}")
        for lst in adj:
            lst.sort()
        self.t = t
        self.adj = adj
        self.parent, self.depth, self.bfs_order = _bfs(adj, 0)
        if len(self.bfs_order) != t:
            raise BadArguments("edges do not form a connected tree")
        self.max_degree = max((len(a) for a in adj), default=0)
        cls = [1 if d % 2 == 0 else 2 for d in self.depth]
        n1 = cls.count(1)
        if n1 < t - n1:
            cls = [3 - c for c in cls]
        self.colour_class = cls
        self.t1 = cls.count(1)
        self.t2 = t - self.t1

    @property
    def Delta(self) -> int:
        return self.max_degree

    def edges(self) -> list[tuple[int, int]]:
        return [(p, v) if p < v else (v, p) for v, p in enumerate(self.parent) if p is not None]

    def to_json(self) -> dict:
        return {"t": self.t, "edges": [list(e) for e in sorted(self.edges())]}

    @classmethod
    def from_json(cls, data: dict) -> "Tree":
        return cls(data["t"], [tuple(e) for e in data["edges"]])

    def __repr__(self) -> str:
        return f"Tree(t={self.t}, Delta={self.max_degree}, classes=({self.t1},{self.t2}))"


def _bfs(adj, root):
    n = len(adj)
    parent: list[int | None] = [None] * n
    depth = [-1] * n
    depth[root] = 0
    order = [root]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if depth[w] < 0:
                depth[w] = depth[u] + 1
                parent[w] = u
                order.append(w)
                queue.append(w)
    return parent, depth, order


def colour_classes(T: Tree) -> tuple[int, int, list[int]]:
    return T.t1, T.t2, list(T.colour_class)


@dataclass(frozen=True)
class Shrub:
    vertices: tuple[int, ...]  # root first, then BFS order
    root: int
    parent_cut: int | None


@dataclass
class TreeDecomposition:
    tree: Tree
    S: int
    cut: frozenset
    shrubs: list[Shrub]
    order: list[int]
    cut_root: int | None  # x*_1, the root used for processing
    parent: list  # parent pointers of the tree rooted at cut_root (or 0)
    shrub_of: dict  # tree vertex -> shrub index

    @property
    def cut_order(self) -> list[int]:
        return [x for x in self.order if x in self.cut]

    def children(self, x: int) -> list[int]:
        return [w for w in self.tree.adj[x] if self.parent[w] == x]

    def max_shrub_size(self) -> int:
        return max((len(s.vertices) for s in self.shrubs), default=0)


def s_cut(T: Tree, S: int) -> TreeDecomposition:
    """Cut vertices C with every component of T - C of size <= S and |C| <= t/S.

    Repeatedly takes the oversized component with the lowest-index top
    vertex and descends from its top into the lowest-index oversized child
    component until the vertex's small components plus itself exceed S.
    """
    S = int(S)
    if S < 1:
        raise BadArguments("S must be >= 1")
    parent, order = T.parent, T.bfs_order
    size = [1] * T.t
    for v in reversed(order):
        if parent[v] is not None:
            size[parent[v]] += size[v]
    in_cut = [False] * T.t
    # components of T - C are identified by their top vertex (closest to 0)
    heap = [0] if size[0] > S else []
    while heap:
        top = heapq.heappop(heap)
        if in_cut[top] or size[top] <= S:
            continue
        x = top
        while True:
            kids = [w for w in T.adj[x] if w != parent[x] and not in_cut[w]]
            small = sum(size[w] for w in kids if size[w] <= S)
            up = size[top] - size[x]
            if 0 < up <= S:
                small += up
            if small + 1 > S:
                break
            x = min(w for w in kids if size[w] > S)
        in_cut[x] = True
        cut_size = size[x]
        a = x
        while a != top:
            a = parent[a]
            size[a] -= cut_size
        size[x] = 0
        for w in T.adj[x]:
            if w != parent[x] and not in_cut[w] and size[w] > S:
                heapq.heappush(heap, w)
        if x != top and size[top] > S:
            heapq.heappush(heap, top)
    cut = frozenset(v for v in range(T.t) if in_cut[v])
    assert len(cut) <= T.t / S
    return decompose(T, cut, S)


def decompose(T: Tree, cut: Iterable[int], S: int) -> TreeDecomposition:
    """Shrubs and processing order for a given cut."""
    cut = frozenset(cut)
    root = None
    if cut:
        for v in T.bfs_order:
            if v in cut and any(w not in cut for w in T.adj[v]):
                root = v
                break
        if root is None:
            root = min(cut)
    parent, _, bfs = _bfs(T.adj, root if root is not None else 0)
    shrub_of: dict[int, int] = {}
    shrubs: list[Shrub] = []
    for v in bfs:
        if v in cut or v in shrub_of:
            continue
        # v is the top of a new shrub
        members = [v]
        shrub_of[v] = len(shrubs)
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for w in T.adj[u]:
                if w != parent[u] and w not in cut:
                    shrub_of[w] = len(shrubs)
                    members.append(w)
                    queue.append(w)
        shrubs.append(Shrub(tuple(members), v, parent[v]))
    if root is None:
        order = list(shrubs[0].vertices)
    else:
        order = []
        by_parent: dict[int, list[Shrub]] = {}
        for sh in shrubs:
            by_parent.setdefault(sh.parent_cut, []).append(sh)
        for x in bfs:
            if x in cut:
                order.append(x)
                for sh in sorted(by_parent.get(x, []), key=lambda s: s.root):
                    order.extend(sh.vertices)
    return TreeDecomposition(T, S, cut, shrubs, order, root, parent, shrub_of)


def check_decomposition(D: TreeDecomposition) -> list[str]:
    """Independent audit of cut size, shrub sizes and order validity."""
    T, problems = D.tree, []
    if len(D.cut) > T.t / D.S:
        problems.append(f"|C|={len(D.cut)} exceeds t/S={T.t / D.S:.2f}")
    seen: set[int] = set()
    for v in range(T.t):
        if v in D.cut or v in seen:
            continue
        comp, stack = {v}, [v]
        while stack:
            u = stack.pop()
            for w in T.adj[u]:
                if w not in D.cut and w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        if len(comp) > D.S:
            problems.append(f"component of size {len(comp)} > S={D.S}")
    if sorted(D.order) != list(range(T.t)):
        problems.append("order is not a permutation")
    pos = {v: i for i, v in enumerate(D.order)}
    for v in range(T.t):
        p = D.parent[v]
        if p is not None and pos[p] > pos[v]:
            problems.append(f"vertex {v} precedes its parent {p}")
            break
    return problems


def random_tree(t: int, max_degree: int, seed=None) -> Tree:
    """Random tree from a Pruefer sequence with per-vertex multiplicity capped."""
    t = int(t)
    if t < 1:
        raise BadArguments("t must be positive")
    if t <= 2:
        return Tree(t, [(0, 1)] if t == 2 else [])
    if max_degree < 2:
        raise Infeasible(f"no tree on {t} vertices has max degree {max_degree}")
    rng = np.random.default_rng(seed)
    cap = max_degree - 1
    seq = rng.integers(t, size=t - 2)
    counts = np.bincount(seq, minlength=t)
    if counts.max() > cap:
        # keep the first `cap` occurrences of each vertex, redraw the rest among unsaturated vertices
        seen = np.zeros(t, dtype=int)
        excess = []
        for pos, v in enumerate(seq.tolist()):
            seen[v] += 1
            if seen[v] > cap:
                excess.append(pos)
        counts = np.minimum(counts, cap)
        open_vertices = np.flatnonzero(counts < cap).tolist()
        for pos in excess:
            idx = int(rng.integers(len(open_vertices)))
            v = open_vertices[idx]
            seq[pos] = v
            counts[v] += 1
            if counts[v] >= cap:
                open_vertices[idx] = open_vertices[-1]
                open_vertices.pop()
    seq = seq.tolist()
    return Tree(t, _pruefer_decode(seq, t))


def _pruefer_decode(seq: Sequence[int], t: int) -> list[tuple[int, int]]:
    degree = [1] * t
    for v in seq:
        degree[v] += 1
    leaves = [v for v in range(t) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return edges


def path_tree(t: int) -> Tree:
    return Tree(t, [(i, i + 1) for i in range(t - 1)])


def star_tree(leaves: int) -> Tree:
    return Tree(leaves + 1, [(0, i) for i in range(1, leaves + 1)])
