"""Monochromatic matchings and fork systems.

Exact finders (Edmonds' blossom algorithm for matchings, max-flow for fork
systems) plus the two greedy constructions used inside the structural
arguments: a one-colour matching in an eta-complete pair, and a near-perfect
matching in an eta-complete tripartite triple.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from . import bitset
from .errors import (
    BadArguments,
    ConstructionFailed,
    HypothesisViolated,
    NotFound,
    OddComponent,
    SizeHypothesisViolated,
)
from .graph_core import Colour, ColourComponent, ColouredTripartiteGraph, is_eta_complete


@dataclass(frozen=True)
class Matching:
    colour: Colour | None
    edges: tuple[tuple[int, int], ...]
    component_id: int | None = None

    @property
    def size(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def vertices(self) -> set[int]:
        return {v for e in self.edges for v in e}

    def partner(self) -> dict[int, int]:
        out = {}
        for u, v in self.edges:
            out[u] = v
            out[v] = u
        return out

    def to_json(self) -> dict:
        return {
            "kind": "matching",
            "colour": self.colour.code if self.colour else None,
            "edges": [list(e) for e in self.edges],
        }


@dataclass(frozen=True)
class ForkSystem:
    """Vertex-disjoint stars; ``size`` counts prongs.

    ``center_side``/``prong_side`` are the two classes of the bipartite
    subgraph witnessing the system (for an even component, its bipartition).
    """

    colour: Colour
    forks: tuple[tuple[int, tuple[int, ...]], ...]
    ratio: int
    center_side: frozenset = field(default_factory=frozenset)
    prong_side: frozenset = field(default_factory=frozenset)
    component_id: int | None = None

    @property
    def size(self) -> int:
        return sum(len(p) for _, p in self.forks)

    @property
    def centers(self) -> list[int]:
        return [c for c, _ in self.forks]

    @property
    def prongs(self) -> list[int]:
        return [p for _, ps in self.forks for p in ps]

    @property
    def max_prongs(self) -> int:
        return max((len(p) for _, p in self.forks), default=0)

    def edges(self) -> list[tuple[int, int]]:
        return [(c, p) for c, ps in self.forks for p in ps]

    def center_of(self) -> dict[int, int]:
        return {p: c for c, ps in self.forks for p in ps}

    def to_json(self) -> dict:
        return {
            "kind": "forks",
            "colour": self.colour.code,
            "forks": [{"center": c, "prongs": list(p)} for c, p in self.forks],
            "ratio": self.ratio,
            "size": self.size,
        }


def matching_as_forks(M: Matching, center_side: Iterable[int], prong_side: Iterable[int], ratio: int = 1) -> ForkSystem:
    """View a matching as a 1-fork system, centres taken from ``center_side``."""
    centers = set(center_side)
    forks = []
    for u, v in M.edges:
        c, p = (u, v) if u in centers else (v, u)
        forks.append((c, (p,)))
    forks.sort()
    return ForkSystem(M.colour, tuple(forks), ratio, frozenset(center_side), frozenset(prong_side), M.component_id)


# -- validation ---------------------------------------------------------------


def _component_of_vertices(G: ColouredTripartiteGraph, colour: Colour, vertices: Iterable[int]) -> set:
    index = G.component_index(colour)
    return {index.get(v) for v in vertices}


def validate_matching(G: ColouredTripartiteGraph, M: Matching, require_connected: bool = True) -> list[str]:
    problems = []
    seen: set[int] = set()
    for u, v in M.edges:
        if u in seen or v in seen:
            problems.append(f"edges not vertex-disjoint at {u}-{v}")
        seen.update((u, v))
        if M.colour is None:
            if not G.has_edge(u, v):
                problems.append(f"{u}-{v} is not an edge")
        elif not G.has_edge(u, v, M.colour):
            problems.append(f"{u}-{v} is not {M.colour.name}")
    if require_connected and M.edges and M.colour is not None:
        comps = _component_of_vertices(G, M.colour, seen)
        if len(comps) != 1 or None in comps:
            problems.append(f"matching spans components {sorted(c for c in comps if c is not None)}")
        elif M.component_id is not None and comps != {M.component_id}:
            problems.append(f"declared component {M.component_id} but edges lie in {comps}")
    return problems


def validate_fork_system(G: ColouredTripartiteGraph, F: ForkSystem, require_connected: bool = True) -> list[str]:
    problems = []
    seen: set[int] = set()
    for center, prongs in F.forks:
        if not 1 <= len(prongs) <= F.ratio:
            problems.append(f"fork at {center} has {len(prongs)} prongs (ratio {F.ratio})")
        for v in (center, *prongs):
            if v in seen:
                problems.append(f"vertex {v} used twice")
            seen.add(v)
        if F.center_side and center not in F.center_side:
            problems.append(f"centre {center} outside centre side")
        for p in prongs:
            if not G.has_edge(center, p, F.colour):
                problems.append(f"{center}-{p} is not {F.colour.name}")
            if F.prong_side and p not in F.prong_side:
                problems.append(f"prong {p} outside prong side")
    if F.center_side & F.prong_side:
        problems.append("centre and prong sides overlap")
    if require_connected and F.forks:
        comps = _component_of_vertices(G, F.colour, seen)
        if len(comps) != 1 or None in comps:
            problems.append(f"fork system spans components {sorted(c for c in comps if c is not None)}")
        else:
            comp = G.components(F.colour)[next(iter(comps))]
            if not comp.is_odd:
                # even component: centres must sit on one side of its unique bipartition
                center_sides = {comp.side_of(c) for c in F.centers}
                prong_sides = {comp.side_of(p) for p in F.prongs}
                if len(center_sides) > 1 or len(prong_sides) > 1 or center_sides == prong_sides:
                    problems.append("centres/prongs straddle the component bipartition")
    return problems


# -- Edmonds' blossom algorithm ---------------------------------------------------


def max_matching(edge_set: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Maximum-cardinality matching of a general graph (blossom contraction).

    Returns edges as sorted ``(u, v)`` pairs with ``u < v``, sorted.
    """
    edges = [(int(u), int(v)) for u, v in edge_set]
    labels = sorted({v for e in edges for v in e})
    pos = {v: i for i, v in enumerate(labels)}
    n = len(labels)
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        if u == v:
            continue
        a, b = pos[u], pos[v]
        adj[a].append(b)
        adj[b].append(a)
    for lst in adj:
        lst.sort()
    match = [-1] * n
    # greedy warm start
    for v in range(n):
        if match[v] == -1:
            for w in adj[v]:
                if match[w] == -1:
                    match[v], match[w] = w, v
                    break

    def find_path(root: int) -> int:
        used = [False] * n
        parent = [-1] * n
        base = list(range(n))
        used[root] = True
        queue = deque([root])

        def lca(a: int, b: int) -> int:
            seen = [False] * n
            while True:
                a = base[a]
                seen[a] = True
                if match[a] == -1:
                    break
                a = parent[match[a]]
            while True:
                b = base[b]
                if seen[b]:
                    return b
                b = parent[match[b]]

        def mark(v: int, b: int, child: int, blossom: list[bool]) -> None:
            while base[v] != b:
                blossom[base[v]] = blossom[base[match[v]]] = True
                parent[v] = child
                child = match[v]
                v = parent[match[v]]

        while queue:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and parent[match[to]] != -1):
                    cur = lca(v, to)
                    blossom = [False] * n
                    mark(v, cur, to, blossom)
                    mark(to, cur, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if match[to] == -1:
                        return _augment(to, parent, match)
                    used[match[to]] = True
                    queue.append(match[to])
        return -1

    for v in range(n):
        if match[v] == -1:
            find_path(v)
    out = sorted((labels[v], labels[match[v]]) for v in range(n) if match[v] > v)
    return out


def _augment(v: int, parent: list[int], match: list[int]) -> int:
    end = v
    while v != -1:
        pv = parent[v]
        ppv = match[pv]
        match[v] = pv
        match[pv] = v
        v = ppv
    return end


def component_edges(G: ColouredTripartiteGraph, component: ColourComponent) -> list[tuple[int, int]]:
    verts = np.array(sorted(component.vertices))
    sub = np.triu(G.adjacency(component.colour)[np.ix_(verts, verts)])
    us, vs = np.nonzero(sub)
    return list(zip(verts[us].tolist(), verts[vs].tolist()))


def max_connected_matching(G: ColouredTripartiteGraph, colour, require_odd: bool = False) -> Matching:
    """Largest monochromatic matching inside a single colour component."""
    colour = Colour.parse(colour)
    best: Matching | None = None
    for comp in G.components(colour):
        if require_odd and not comp.is_odd:
            continue
        # a matching cannot beat half the component
        if best is not None and len(comp.vertices) // 2 <= best.size:
            continue
        edges = max_matching(component_edges(G, comp))
        if best is None or len(edges) > best.size:
            best = Matching(colour, tuple(edges), comp.index)
    if best is None:
        raise NotFound(f"no {'odd ' if require_odd else ''}{colour.name} component")
    return best


# -- fork systems ---------------------------------------------------------------


def max_fork_system(
    G: ColouredTripartiteGraph,
    colour,
    component: ColourComponent,
    ratio: int,
    center_side_choice: str = "best",
) -> ForkSystem:
    """Fork system with the most prongs in an even component (max-flow)."""
    colour = Colour.parse(colour)
    if component.is_odd:
        raise OddComponent(f"component {component.index} is not bipartite")
    if ratio < 1:
        raise BadArguments("ratio must be >= 1")
    if center_side_choice not in ("side1", "side2", "best"):
        raise BadArguments(f"unknown center_side_choice {center_side_choice!r}")
    choices = {"side1": [0], "side2": [1], "best": [0, 1]}[center_side_choice]
    best = None
    for side in choices:
        centers = sorted(component.sides[side])
        prongs = sorted(component.sides[1 - side])
        forks = _flow_forks(G, colour, centers, prongs, ratio)
        F = ForkSystem(colour, forks, ratio, component.sides[side], component.sides[1 - side], component.index)
        if best is None or F.size > best.size:
            best = F
    return best


def _flow_forks(G, colour, centers, prongs, ratio) -> tuple:
    if not centers or not prongs:
        return ()
    nc, npr = len(centers), len(prongs)
    source, sink = 0, nc + npr + 1
    sub = G.adjacency(colour)[np.ix_(centers, prongs)]
    ci, pi = np.nonzero(sub)
    rows = np.concatenate([np.zeros(nc, int), ci + 1, np.arange(npr) + nc + 1])
    cols = np.concatenate([np.arange(nc) + 1, pi + nc + 1, np.full(npr, sink)])
    caps = np.concatenate([np.full(nc, ratio), np.ones(len(ci), int), np.ones(npr, int)]).astype(np.int32)
    graph = csr_matrix((caps, (rows, cols)), shape=(sink + 1, sink + 1))
    flow = maximum_flow(graph, source, sink).flow
    flow = flow.tocoo() if hasattr(flow, "tocoo") else csr_matrix(flow).tocoo()
    assigned: dict[int, list[int]] = {}
    for r, c, val in zip(flow.row, flow.col, flow.data):
        if val > 0 and 1 <= r <= nc and nc + 1 <= c <= nc + npr:
            assigned.setdefault(centers[r - 1], []).append(prongs[c - nc - 1])
    return tuple(sorted((c, tuple(sorted(p))) for c, p in assigned.items()))


# -- greedy constructions -----------------------------------------------------------


def greedy_bipartite_matching(
    G: ColouredTripartiteGraph,
    colour: Colour | None,
    left: Iterable[int],
    right: Iterable[int],
    exclude: int = 0,
    limit: int | None = None,
) -> list[tuple[int, int]]:
    """Match each left vertex in turn to its lowest unused neighbour on the right."""
    nbrs = G.nbr_bits(colour)
    free = bitset.from_iter(right) & ~exclude
    used_left = exclude
    out = []
    for u in left:
        if limit is not None and len(out) >= limit:
            break
        if used_left >> u & 1:
            continue
        hit = nbrs[u] & free
        if hit:
            w = bitset.lowest(hit)
            free &= ~(1 << w)
            used_left |= 1 << u
            out.append((u, w))
    return out


def _component_id_if_connected(G, colour, edges) -> int | None:
    if colour is None or not edges:
        return None
    comps = _component_of_vertices(G, colour, (v for e in edges for v in e))
    return next(iter(comps)) if len(comps) == 1 and None not in comps else None


def make_matching(G, colour, edges) -> Matching:
    edges = tuple(sorted((min(u, v), max(u, v)) for u, v in edges))
    return Matching(colour, edges, _component_id_if_connected(G, colour, edges))


def greedy_monochromatic_matching(G: ColouredTripartiteGraph, D, D2, eta: float) -> Matching:
    """One-colour matching of size >= m/2 - eta*n in an eta-complete pair.

    Each vertex of the smaller side votes for its majority colour; the larger
    voting block is matched greedily into the other side.
    """
    D, D2 = sorted(set(D)), sorted(set(D2))
    if not is_eta_complete(G, D, D2, eta):
        raise HypothesisViolated("pair is not eta-complete")
    if len(D) > len(D2):
        D, D2 = D2, D
    m = len(D)
    if m == 0:
        return Matching(Colour.GREEN, ())
    sub = G.matrix[np.ix_(D, D2)]
    red = (sub == int(Colour.RED)).sum(axis=1)
    green = (sub == int(Colour.GREEN)).sum(axis=1)
    votes_red = [v for v, r, g in zip(D, red, green) if r > g]
    votes_green = [v for v, r, g in zip(D, red, green) if r <= g]
    colour, X = (Colour.RED, votes_red) if len(votes_red) > len(votes_green) else (Colour.GREEN, votes_green)
    edges = greedy_bipartite_matching(G, colour, X, D2)
    bound = m / 2 - eta * G.n_scale
    if len(edges) < bound:
        raise ConstructionFailed(f"greedy matching {len(edges)} below m/2 - eta n = {bound}")
    return make_matching(G, colour, edges)


def near_perfect_triple_matching(G: ColouredTripartiteGraph, A, B, C, eta: float, colour=None) -> Matching:
    """Matching of K[A', B', C'] covering all but ``4 eta n + 1`` vertices.

    Splits B' and C' into U = U_B + U_C (matched into A') and W, W' (matched
    to each other) with x = |B'| - |C'| and y = floor((|A'| - x) / 2).
    """
    colour = Colour.parse(colour) if colour is not None else None
    A, B, C = sorted(set(A)), sorted(set(B)), sorted(set(C))
    if not len(A) >= len(B) >= len(C):
        raise SizeHypothesisViolated("need |A'| >= |B'| >= |C'|")
    if len(A) > len(B) + len(C):
        raise SizeHypothesisViolated("need |A'| <= |B' u C'|")
    x = len(B) - len(C)
    y = (len(A) - x) // 2
    U_B, W = B[: x + y], B[x + y :]
    U_C, W2 = C[:y], C[y:]
    U = U_B + U_C
    U2 = A[: len(U)]
    for left, right in ((U, U2), (W, W2)):
        if left and right and not is_eta_complete(G, left, right, eta, colour):
            raise HypothesisViolated("split pair is not eta-complete")
    edges = greedy_bipartite_matching(G, colour, U, U2) + greedy_bipartite_matching(G, colour, W, W2)
    covered = 2 * len(edges)
    bound = len(A) + len(B) + len(C) - 4 * eta * G.n_scale - 1
    if covered < bound:
        raise ConstructionFailed(f"covers {covered} < {bound}")
    return make_matching(G, colour, edges)
