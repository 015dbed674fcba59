"""Distributing shrubs over a matching or fork system, and repairing the result
into a homomorphism with small neighbourhood images."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AssignmentFailure,
    CapacityExceeded,
    HypothesisViolated,
    PreconditionError,
    WalkConditionViolated,
)
from .graph_core import Colour, ColouredTripartiteGraph
from .structures import ForkSystem, Matching, matching_as_forks
from .tree_tools import Tree, TreeDecomposition, s_cut


@dataclass(frozen=True)
class WeightTable:
    rows: tuple[tuple[int, int], ...]
    S: int

    def __post_init__(self):
        for a1, a2 in self.rows:
            if a1 < 0 or a2 < 0:
                raise PreconditionError("weights must be non-negative")
            if a1 + a2 > self.S:
                raise PreconditionError(f"row ({a1},{a2}) exceeds S={self.S}")

    @property
    def t1(self) -> int:
        return sum(a for a, _ in self.rows)

    @property
    def t2(self) -> int:
        return sum(b for _, b in self.rows)

    @property
    def t(self) -> int:
        return self.t1 + self.t2

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], S: int | None = None) -> "WeightTable":
        rows = tuple((int(a), int(b)) for a, b in rows)
        if S is None:
            S = max((a + b for a, b in rows), default=0)
        return cls(rows, int(S))

    @classmethod
    def from_decomposition(cls, D: TreeDecomposition) -> "WeightTable":
        cls_map = D.tree.colour_class
        rows = []
        for sh in D.shrubs:
            a1 = sum(1 for v in sh.vertices if cls_map[v] == 1)
            rows.append((a1, len(sh.vertices) - a1))
        return cls(tuple(rows), max(D.S, max((a + b for a, b in rows), default=0)))


def matching_bound(W: WeightTable, num_edges: int) -> float:
    return W.t / (2 * num_edges) + 2 * W.S


def assign_to_matching(W: WeightTable, M: Matching | Sequence[tuple[int, int]]) -> dict:
    """Map (row, side) to matching vertices; rows go to the lightest edge,
    then each edge balances its two endpoints."""
    edges = list(M.edges if isinstance(M, Matching) else M)
    if not edges:
        raise PreconditionError("matching must have at least one edge")
    edge_load = [0] * len(edges)
    per_edge: list[list[int]] = [[] for _ in edges]
    for i, (a1, a2) in enumerate(W.rows):
        e = min(range(len(edges)), key=lambda k: (edge_load[k], k))
        edge_load[e] += a1 + a2
        per_edge[e].append(i)
    phi: dict[tuple[int, int], int] = {}
    load: dict[int, int] = {}
    for (v, w), rows in zip(edges, per_edge):
        lv = lw = 0
        for i in rows:
            a1, a2 = W.rows[i]
            if abs((lv + a1) - (lw + a2)) <= abs((lv + a2) - (lw + a1)):
                phi[(i, 1)], phi[(i, 2)] = v, w
                lv, lw = lv + a1, lw + a2
            else:
                phi[(i, 1)], phi[(i, 2)] = w, v
                lv, lw = lv + a2, lw + a1
        load[v], load[w] = lv, lw
    bound = matching_bound(W, len(edges))
    worst = max(load.values())
    assert worst <= bound + 1e-9, f"matching assignment load {worst} exceeds {bound}"
    return phi


def fork_bounds(W: WeightTable, F: ForkSystem) -> tuple[float, float]:
    size = F.size
    slack = math.sqrt(12 * W.t * W.S * size)
    return W.t1 / size + slack, F.ratio * W.t2 / size + slack


def group_rows(W: WeightTable) -> list[list[int]]:
    """Rows with sum >= S/2 stay alone; consecutive lighter rows are pooled
    until the pool reaches S/2, so every pool but possibly the last is heavy."""
    groups, pool, pool_sum = [], [], 0
    for i, (a1, a2) in enumerate(W.rows):
        if 2 * (a1 + a2) >= W.S:
            groups.append([i])
            continue
        pool.append(i)
        pool_sum += a1 + a2
        if 2 * pool_sum >= W.S:
            groups.append(pool)
            pool, pool_sum = [], 0
    if pool:
        groups.append(pool)
    return groups


@dataclass
class ForkAssignment:
    phi: dict
    attempts: int
    prong_load: dict
    centre_load: dict


def assign_to_forks(W: WeightTable, F: ForkSystem, retries: int = 20, seed=None) -> ForkAssignment:
    """Random prong per (grouped) row, centre implied; resample until both load bounds hold."""
    if W.S > W.t:
        raise PreconditionError("need S <= t")
    if not F.forks:
        if W.t2 > 0 or W.t1 > 0:
            raise PreconditionError("fork system has no centres")
        return ForkAssignment({}, 0, {}, {})
    prongs = F.prongs
    if len(prongs) < len(F.centers):
        raise PreconditionError("need |V1(F)| >= |V2(F)|")
    centre_of = F.center_of()
    groups = group_rows(W)
    sums = [(sum(W.rows[i][0] for i in g), sum(W.rows[i][1] for i in g)) for g in groups]
    b1, b2 = fork_bounds(W, F)
    rng = np.random.default_rng(seed)
    for attempt in range(1, retries + 1):
        picks = rng.integers(len(prongs), size=len(groups))
        prong_load: dict[int, int] = {}
        centre_load: dict[int, int] = {}
        for (s1, s2), k in zip(sums, picks):
            p = prongs[int(k)]
            prong_load[p] = prong_load.get(p, 0) + s1
            c = centre_of[p]
            centre_load[c] = centre_load.get(c, 0) + s2
        if max(prong_load.values(), default=0) <= b1 and max(centre_load.values(), default=0) <= b2:
            phi = {}
            for g, k in zip(groups, picks):
                p = prongs[int(k)]
                for i in g:
                    phi[(i, 1)], phi[(i, 2)] = p, centre_of[p]
            return ForkAssignment(phi, attempt, prong_load, centre_load)
    raise AssignmentFailure(f"no fork assignment met the load bounds in {retries} attempts")


# -- walks in the reduced graph ---------------------------------------------------------


def adjacency_lists(G: ColouredTripartiteGraph, colour) -> list[list[int]]:
    A = G.adjacency(Colour.parse(colour))
    return [np.flatnonzero(A[i]).tolist() for i in range(A.shape[0])]


@dataclass(frozen=True)
class WalkParity:
    even_walk: list | None
    odd_walk: list | None


def walk_parity(adj: Sequence[Sequence[int]], u: int, v: int, allow_empty: bool = False) -> WalkParity:
    """Shortest walks of each parity from u to v (BFS over (vertex, parity) states).

    Walks have at least one edge unless ``allow_empty`` is set, in which case
    u == v yields the trivial even walk.
    """
    origin = ("origin",)
    prev: dict = {}
    queue: deque = deque()
    if allow_empty:
        prev[(u, 0)] = origin
        queue.append((u, 0))
    else:
        for w in adj[u]:
            if (w, 1) not in prev:
                prev[(w, 1)] = origin
                queue.append((w, 1))
    while queue:
        x, par = queue.popleft()
        for w in adj[x]:
            state = (w, 1 - par)
            if state not in prev:
                prev[state] = (x, par)
                queue.append(state)

    def trace(state):
        if state not in prev:
            return None
        path = []
        while state is not origin:
            path.append(state[0])
            state = prev[state]
        if not allow_empty:
            path.append(u)
        return path[::-1]

    return WalkParity(trace((v, 0)), trace((v, 1)))


def parity_oracle(adj: Sequence[Sequence[int]]):
    """Component and side labels, answering walk-parity existence in O(1)."""
    n = len(adj)
    comp = [-1] * n
    side = [0] * n
    odd: list[bool] = []
    for s in range(n):
        if comp[s] >= 0:
            continue
        cid = len(odd)
        comp[s] = cid
        bip = True
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for w in adj[x]:
                if comp[w] < 0:
                    comp[w], side[w] = cid, 1 - side[x]
                    queue.append(w)
                elif side[w] == side[x]:
                    bip = False
        odd.append(not bip)

    def has_walk(a: int, b: int, parity: int) -> bool:
        if comp[a] != comp[b]:
            return False
        if a == b and parity == 0:
            return True
        if len(adj[a]) == 0:
            return False
        return odd[comp[a]] or (side[a] ^ side[b]) == parity

    return has_walk


# -- repairing the homomorphism -----------------------------------------------------------


def check_walk_condition(T: Tree, cut: Iterable[int], psi: dict, adj) -> tuple[int, int] | None:
    """First pair (x, y) of non-cut vertices joined through cut vertices only
    whose images admit no walk of the right parity, or None."""
    cut = set(cut)
    has_walk = parity_oracle(adj)
    seen: set[int] = set()
    for start in sorted(cut):
        if start in seen:
            continue
        # component of T[C] and its non-cut neighbours with distance parities
        comp, stack = {start}, [start]
        while stack:
            u = stack.pop()
            for w in T.adj[u]:
                if w in cut and w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        depth = {start: 0}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in T.adj[u]:
                if w in comp and w not in depth:
                    depth[w] = depth[u] + 1
                    queue.append(w)
        boundary = sorted({(w, depth[u] + 1) for u in comp for w in T.adj[u] if w not in cut})
        for i, (x, dx) in enumerate(boundary):
            for y, dy in boundary[i + 1 :]:
                if x == y:
                    continue
                if not has_walk(psi[x], psi[y], (dx + dy) % 2):
                    return (x, y)
    return None


def repair_homomorphism(T: Tree, D: TreeDecomposition, psi: dict, adj, Delta: int | None = None) -> list[int]:
    """Turn a shrub-wise assignment into a homomorphism of the whole tree.

    Cut vertices copy the image of their grandparent, their shrub children
    copy the parent's image, and each shrub then walks back to its original
    assignment along an even walk spliced over its first levels.
    """
    cut = set(D.cut)
    k = len(adj)
    Delta = T.max_degree if Delta is None else Delta
    _check_psi(T, D, psi, adj)
    if not cut:
        return [psi[v] for v in range(T.t)]
    bad = check_walk_condition(T, cut, psi, adj)
    if bad is not None:
        raise WalkConditionViolated(*bad)
    parent = D.parent
    root = D.cut_root
    children = [[] for _ in range(T.t)]
    for v in range(T.t):
        if parent[v] is not None:
            children[parent[v]].append(v)
    shrub_by_root = {sh.root: sh for sh in D.shrubs}
    h: list[int | None] = [None] * T.t

    def splice(y: int) -> None:
        sh = shrub_by_root[y]
        walk = walk_parity(adj, h[y], psi[y], allow_empty=True).even_walk
        if walk is None:
            raise WalkConditionViolated(parent[y], y, f"no even walk from {h[y]} to {psi[y]} for shrub root {y}")
        m = len(walk) - 1
        level = {y: 0}
        for z in sh.vertices:
            if z != y:
                level[z] = level[parent[z]] + 1
            h[z] = walk[level[z]] if level[z] <= m else psi[z]

    x1 = min(w for w in children[root] if w not in cut)
    h[root] = min(adj[psi[x1]])
    for y in children[root]:
        if y not in cut:
            h[y] = psi[x1]
            splice(y)
    for x in D.cut_order:
        if x == root:
            continue
        z = parent[x]
        h[x] = psi[x1] if z == root else h[parent[z]]
        for y in children[x]:
            if y not in cut:
                h[y] = h[z]
                splice(y)
    changed = sum(1 for v in range(T.t) if v not in cut and h[v] != psi[v])
    bound = 3 * len(cut) * Delta ** (2 * k + 1)
    assert changed <= bound, f"{changed} changed vertices exceed {bound}"
    return h  # type: ignore[return-value]


def _check_psi(T: Tree, D: TreeDecomposition, psi: dict, adj) -> None:
    for sh in D.shrubs:
        images = {psi[v] for v in sh.vertices}
        if len(images) > 2:
            raise PreconditionError(f"shrub rooted at {sh.root} uses {len(images)} clusters")
        for v in sh.vertices:
            for w in T.adj[v]:
                if w in D.shrub_of and D.shrub_of[w] == D.shrub_of[v] and psi[w] not in adj[psi[v]]:
                    raise PreconditionError(f"psi is not a homomorphism on edge {v}-{w}")


# -- valid assignments -----------------------------------------------------------------------


@dataclass
class ClusterAssignment:
    h: list[int]
    loads: list[int]
    rho: float
    L: float
    cut: tuple[int, ...] = ()
    case: str = ""
    changed: int = 0
    checks: list = field(default_factory=list)  # inequalities evaluated while building

    def to_json(self) -> dict:
        return {"h": list(self.h), "cut": list(self.cut), "params": {"rho": self.rho, "L": self.L}}

    @classmethod
    def from_json(cls, data: dict, k: int | None = None) -> "ClusterAssignment":
        h = [int(x) for x in data["h"]]
        k = k if k is not None else (max(h) + 1 if h else 0)
        loads = [0] * k
        for c in h:
            loads[c] += 1
        return cls(h, loads, float(data["params"]["rho"]), float(data["params"]["L"]), tuple(data.get("cut", ())))


def check_valid(tree_edges, h: Sequence[int], adj, rho: float, L: float) -> list[str]:
    """Independent check of the three clauses of a (rho, L)-valid assignment."""
    problems = []
    nbr_images: dict[int, set] = {}
    for u, v in tree_edges:
        if h[v] not in set(adj[h[u]]):
            problems.append(f"edge {u}-{v} maps to non-edge {h[u]}-{h[v]}")
        nbr_images.setdefault(u, set()).add(h[v])
        nbr_images.setdefault(v, set()).add(h[u])
    for x, imgs in nbr_images.items():
        if len(imgs) > 2:
            problems.append(f"neighbours of {x} use {len(imgs)} clusters")
    counts: dict[int, int] = {}
    for c in h:
        counts[c] = counts.get(c, 0) + 1
    for c, load in counts.items():
        if not load < (1 - rho) * L:
            problems.append(f"cluster {c} receives {load} >= (1-rho)L = {(1 - rho) * L:.1f}")
    return problems


def psi_from_phi(D: TreeDecomposition, phi: dict) -> dict:
    cls_map = D.tree.colour_class
    psi = {}
    for i, sh in enumerate(D.shrubs):
        for v in sh.vertices:
            psi[v] = phi[(i, cls_map[v])]
    return psi


def inequality(name: str, lhs, rhs, strict: bool = False) -> dict:
    """Record of one checked bound, ``lhs <= rhs`` (or ``<`` when strict)."""
    holds = lhs < rhs if strict else lhs <= rhs
    return {"name": name, "lhs": float(lhs), "rhs": float(rhs), "holds": bool(holds)}


def _loads(images) -> dict:
    out: dict = {}
    for c in images:
        out[c] = out.get(c, 0) + 1
    return out


def build_valid_assignment(
    T: Tree,
    reduced: ColouredTripartiteGraph,
    certificate,
    mu: float,
    eps: float,
    cluster_size: float,
    cut_eps: float | None = None,
    seed=None,
    retries: int = 20,
) -> tuple[TreeDecomposition, ClusterAssignment]:
    """Cut the tree, distribute shrubs over the certificate, repair, and verify.

    ``cluster_size`` plays the role of n/k. ``cut_eps`` sets the cut
    granularity S = cut_eps * n/k and the cap on |C| (defaults to ``eps``).
    """
    if not eps < mu / 10:
        raise HypothesisViolated(f"need eps < mu/10, got eps={eps}, mu={mu}")
    cut_eps = eps if cut_eps is None else cut_eps
    colour = certificate.colour
    adj = adjacency_lists(reduced, colour)
    t, t1, t2 = T.t, T.t1, T.t2
    S = max(1, math.floor(cut_eps * cluster_size))
    if certificate.kind == "odd":
        M = certificate.matching
        limit = (1 - mu) * 2 * M.size * cluster_size
        if t > limit:
            raise HypothesisViolated(f"t={t} exceeds (1-mu)2m n/k = {limit:.1f}")
        case = "matching"
        checks = [inequality("t <= (1-mu)*2|M|*n/k", t, limit)]
    else:
        use_forks = 3 * t2 <= t
        if use_forks:
            F = certificate.forks
        else:
            M = certificate.matching
            comp = reduced.components(colour)[reduced.component_index(colour)[M.edges[0][0]]]
            if comp.is_odd:
                lows = {min(e) for e in M.edges}
                F = matching_as_forks(M, lows, M.vertices - lows, 1)
            else:
                F = matching_as_forks(M, comp.sides[0], comp.sides[1], 1)
        tp = (1 - mu) * F.size * cluster_size
        if t1 > tp or t2 > tp / F.ratio:
            raise HypothesisViolated(f"class sizes ({t1},{t2}) exceed t'={tp:.1f} / ratio {F.ratio}")
        case = "forks" if use_forks else "balanced"
        checks = [inequality("t1 <= t'", t1, tp), inequality("t2 <= t'/ratio", t2, tp / F.ratio)]
    D = s_cut(T, S)
    cap = math.floor(cut_eps * cluster_size)
    if len(D.cut) > cap:
        raise CapacityExceeded(f"|C|={len(D.cut)} exceeds eps n/k = {cap}")
    checks += [inequality("|C| <= t/S", len(D.cut), t / S), inequality("|C| <= cut_eps*n/k", len(D.cut), cap)]
    W = WeightTable.from_decomposition(D)
    if case == "matching":
        phi = assign_to_matching(W, M)
        bound = matching_bound(W, M.size)
        psi_loads = _loads(psi_from_phi(D, phi).values())
        checks.append(inequality("max shrub load <= t/(2|M|) + 2S", max(psi_loads.values(), default=0), bound))
    else:
        fa = assign_to_forks(W, F, retries=retries, seed=seed)
        phi = fa.phi
        b1, b2 = fork_bounds(W, F)
        checks.append(inequality("max prong load <= t1/|F| + sqrt(12tS|F|)", max(fa.prong_load.values(), default=0), b1))
        checks.append(inequality("max centre load <= r*t2/|F| + sqrt(12tS|F|)", max(fa.centre_load.values(), default=0), b2))
    psi = psi_from_phi(D, phi)
    h = repair_homomorphism(T, D, psi, adj)
    rho, L = mu / 2, (1 - eps) * cluster_size
    loads = [0] * reduced.num_vertices
    for c in h:
        loads[c] += 1
    changed = sum(1 for v in range(T.t) if v not in D.cut and h[v] != psi[v])
    k = reduced.num_vertices
    checks.append(inequality("changed <= 3|C|Delta^(2k+1)", changed, 3 * len(D.cut) * T.max_degree ** (2 * k + 1)))
    checks.append(inequality("max load < (1-rho)L", max(loads, default=0), (1 - rho) * L, strict=True))
    A = ClusterAssignment(h, loads, rho, L, tuple(sorted(D.cut)), case, changed, checks)
    problems = check_valid(T.edges(), h, adj, rho, L)
    if problems:
        if any("receives" in p for p in problems) and len(problems) == sum("receives" in p for p in problems):
            raise CapacityExceeded("; ".join(problems[:3]))
        raise AssertionError("invalid assignment: " + "; ".join(problems[:3]))
    return D, A
