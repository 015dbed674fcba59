"""Seeded instance generators and exhaustive oracles.

Generators return plain :class:`ColouredTripartiteGraph` objects (plus a
witness for the planted extremal families).  The oracles are deliberately
naive and share no code with the polynomial finders they are used to check.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import BadArguments, ConstructionFailed, TooFewVertices, TooLarge
from .extremal import PyramidWitness, SpiderWitness, validate_witness
from .graph_core import Colour, ColouredTripartiteGraph
from .tree_tools import Tree

MIN_PLANTED_N = 60


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _random_colours(rng: np.random.Generator, sizes: Sequence[int], p_green: float, p_edge: float = 1.0) -> np.ndarray:
    """Symmetric colour matrix: cross-class pairs present w.p. p_edge, green w.p. p_green."""
    total = sum(sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    mat = np.zeros((total, total), dtype=np.int8)
    for a in range(3):
        for b in range(a + 1, 3):
            rows = slice(offsets[a], offsets[a + 1])
            cols = slice(offsets[b], offsets[b + 1])
            shape = (sizes[a], sizes[b])
            block = np.where(rng.random(shape) < p_green, int(Colour.GREEN), int(Colour.RED)).astype(np.int8)
            if p_edge < 1.0:
                block[rng.random(shape) >= p_edge] = 0
            mat[rows, cols] = block
            mat[cols, rows] = block.T
    return mat


def gen_random_colouring(n: int, p_green: float = 0.5, seed=None) -> ColouredTripartiteGraph:
    """Complete K_{n,n,n}, each edge green independently with probability ``p_green``."""
    if n < 1:
        raise BadArguments("n must be positive")
    if not 0.0 <= p_green <= 1.0:
        raise BadArguments("p_green must lie in [0, 1]")
    return ColouredTripartiteGraph((n, n, n), _random_colours(_rng(seed), (n, n, n), p_green))


def gen_sparse_host(n: int, p: float, seed=None, p_green: float = 0.5) -> ColouredTripartiteGraph:
    """Random tripartite graph with edge probability ``p``, edges coloured at random."""
    if n < 1:
        raise BadArguments("n must be positive")
    if not 0.0 < p <= 1.0:
        raise BadArguments("p must lie in (0, 1]")
    return ColouredTripartiteGraph((n, n, n), _random_colours(_rng(seed), (n, n, n), p_green, p_edge=p))


# -- planted extremal configurations --------------------------------------------


def _deletion_passes(eta: float, n: int) -> int:
    # each pass removes one perfect matching per class pair; a vertex then
    # misses at most this many partners per pair, strictly below eta*n in total
    return max(0, math.ceil(eta * n / 2) - 1)


def _delete_matchings(rng, mat: np.ndarray, n: int, passes: int) -> None:
    for _ in range(passes):
        for a in range(3):
            for b in range(a + 1, 3):
                perm = rng.permutation(n)
                us = a * n + np.arange(n)
                vs = b * n + perm
                mat[us, vs] = 0
                mat[vs, us] = 0


def _paint(mat: np.ndarray, X, Y, colour: Colour) -> None:
    X = np.fromiter(sorted(X), dtype=np.int64)
    Y = np.fromiter(sorted(Y), dtype=np.int64)
    if X.size and Y.size:
        mat[np.ix_(X, Y)] = int(colour)
        mat[np.ix_(Y, X)] = int(colour)


def _check_planted_args(n: int, eta: float) -> None:
    if n < MIN_PLANTED_N:
        raise TooFewVertices(f"planted instances need n >= {MIN_PLANTED_N}")
    if not 0.0 < eta < 0.25:
        raise BadArguments("eta must lie in (0, 1/4)")


def gen_pyramid(
    n: int,
    eta: float,
    mode: str = "tunnel",
    c=Colour.GREEN,
    c2=Colour.RED,
    seed=None,
    split: float | None = None,
) -> tuple[ColouredTripartiteGraph, PyramidWitness]:
    """Planted pyramid: D1 in A, D2 in B, D1' and D2' inside C.

    ``split`` is the share of the C-side set given to D1'; ``None`` draws it
    from [0.25, 0.75], and values that leave a side too small to be useful
    collapse that side to the empty set.
    """
    _check_planted_args(n, eta)
    if mode not in ("tunnel", "crossing"):
        raise BadArguments(f"unknown pyramid mode {mode!r}")
    c, c2 = Colour.parse(c), Colour.parse(c2)
    if mode == "tunnel" and c == c2:
        raise BadArguments("a tunnel needs two different colours")
    rng = _rng(seed)
    slack = int(math.floor(eta * n))
    sizes = [n - int(s) for s in rng.integers(0, slack + 1, size=3)]
    D1 = (rng.permutation(n)[: sizes[0]]).tolist()
    D2 = (n + rng.permutation(n)[: sizes[1]]).tolist()
    Dp = (2 * n + rng.permutation(n)[: sizes[2]]).tolist()
    share = float(rng.uniform(0.25, 0.75)) if split is None else float(split)
    cut = int(round(share * len(Dp)))
    floor_size = 2 * eta * n
    if cut < floor_size:
        cut = 0
    elif len(Dp) - cut < floor_size:
        cut = len(Dp)
    D1p, D2p = Dp[:cut], Dp[cut:]

    mat = _random_colours(rng, (n, n, n), 0.5)
    _paint(mat, D1, D1p, c)
    _paint(mat, D2, D2p, c)
    if mode == "tunnel":
        _paint(mat, D1, D2, c2)
    else:
        _paint(mat, D1, D2p, c2)
        _paint(mat, D2, D1p, c2)
    _delete_matchings(rng, mat, n, _deletion_passes(eta, n))
    G = ColouredTripartiteGraph((n, n, n), mat)
    W = PyramidWitness(frozenset(D1), frozenset(D2), frozenset(D1p), frozenset(D2p), c, c2, mode, eta)
    ok, problems = validate_witness(G, W)
    if not ok:
        raise ConstructionFailed(f"planted pyramid failed validation: {problems}")
    return G, W


# Fractions of n for the off-diagonal spider sets; A1, B1 and C_C absorb the rest.
SPIDER_PROFILES: dict[str, dict[str, float]] = {
    "small_core": {"AB": 0.0, "AC": 0.25, "BC": 0.35, "C1": 0.0},
    "small_core_c1": {"AB": 0.0, "AC": 0.25, "BC": 0.35, "C1": 0.05},
    "empty_c1": {"AB": 0.0, "AC": 0.2, "BC": 0.25, "C1": 0.0},
    "cover_c1": {"AB": 0.0, "AC": 0.1, "BC": 0.5, "C1": 0.2},
}


def _profile_size(frac: float, n: int, floor_size: float) -> int:
    size = int(round(frac * n))
    if 0 < size < floor_size:
        size = int(math.ceil(floor_size))
    return size


def gen_spider(
    n: int,
    eta: float,
    profile: str = "small_core",
    seed=None,
    c=Colour.GREEN,
    attempts: int = 50,
) -> tuple[ColouredTripartiteGraph, SpiderWitness]:
    """Planted spider configuration following one of :data:`SPIDER_PROFILES`."""
    _check_planted_args(n, eta)
    if profile not in SPIDER_PROFILES:
        raise BadArguments(f"unknown spider profile {profile!r}; choose from {sorted(SPIDER_PROFILES)}")
    c = Colour.parse(c)
    fr = SPIDER_PROFILES[profile]
    rng = _rng(seed)
    floor_size = 2 * eta * n
    ab, ac, bc, c1 = (_profile_size(fr[key], n, floor_size) for key in ("AB", "AC", "BC", "C1"))
    slack = int(math.floor(eta * n))
    last: list[str] = []
    for _ in range(attempts):
        sa, sb, sc = (int(s) for s in rng.integers(0, slack + 1, size=3))
        a1 = n - ab - ac - sa
        b1 = n - ab - bc - sb
        cc = n - c1 - ac - bc - sc
        if 0 < cc < floor_size:
            cc = 0
        pa, pb, pc = rng.permutation(n), n + rng.permutation(n), 2 * n + rng.permutation(n)

        def take(perm, counts):
            out, pos = [], 0
            for cnt in counts:
                out.append(frozenset(perm[pos : pos + cnt].tolist()))
                pos += cnt
            return out

        A1, A_B, A_C = take(pa, (a1, ab, ac))
        B1, B_A, B_C = take(pb, (b1, ab, bc))
        C1, C_A, C_B, C_C = take(pc, (c1, ac, bc, cc))
        sets = dict(
            A1=A1, A2=A_B | A_C, B1=B1, B2=B_A | B_C, C1=C1, C2=C_A | C_B | C_C,
            A_B=A_B, A_C=A_C, B_A=B_A, B_C=B_C, C_A=C_A, C_B=C_B, C_C=C_C,
        )
        mat = _random_colours(rng, (n, n, n), 0.5)
        firsts = (A1, B1, C1)
        for i, X in enumerate(firsts):
            for j, Y in enumerate((sets["A2"], sets["B2"], sets["C2"])):
                if i != j:
                    _paint(mat, X, Y, c)
        _delete_matchings(rng, mat, n, _deletion_passes(eta, n))
        G = ColouredTripartiteGraph((n, n, n), mat)
        W = SpiderWitness(c=c, eta=eta, **sets)
        ok, last = validate_witness(G, W)
        if ok:
            return G, W
    raise ConstructionFailed(f"could not plant spider profile {profile!r}: {last}")


# -- planted hosts for the full pipeline ----------------------------------------


def gen_odd_template(k: int, seed=None, p_green: float = 0.5, min_matching: int | None = None, attempts: int = 200):
    """Random colouring of K_{k/3,k/3,k/3} having an odd connected matching.

    ``min_matching`` defaults to a perfect matching (k // 2 edges).
    """
    from .structures import max_connected_matching
    from .errors import NotFound

    if k % 3 or k < 3:
        raise BadArguments("k must be a positive multiple of 3")
    need = k // 2 if min_matching is None else int(min_matching)
    rng = _rng(seed)
    for _ in range(attempts):
        m = k // 3
        T = ColouredTripartiteGraph((m, m, m), _random_colours(rng, (m, m, m), p_green))
        for colour in (Colour.GREEN, Colour.RED):
            try:
                M = max_connected_matching(T, colour, require_odd=True)
            except NotFound:
                continue
            if M.size >= need:
                return T
    raise ConstructionFailed(f"no template with an odd connected matching of size {need}")


def gen_planted_host(template: ColouredTripartiteGraph, L: int, p: float = 1.0, seed=None):
    """Blow each template vertex up to a cluster of ``L`` host vertices.

    A template edge of colour c becomes a pair whose edges are c with
    probability ``p`` and the other colour otherwise, so the host stays a
    complete tripartite graph.  Template non-edges become uniformly random
    pairs.  Returns ``(host, partition)`` with cluster i the blow-up of
    template vertex i.
    """
    from .regularity import Partition

    if L < 1:
        raise BadArguments("L must be positive")
    if not 0.0 < p <= 1.0:
        raise BadArguments("p must lie in (0, 1]")
    rng = _rng(seed)
    k = template.num_vertices
    sizes = tuple(s * L for s in template.class_sizes)
    total = sum(sizes)
    mat = np.zeros((total, total), dtype=np.int8)
    starts = [i * L for i in range(k)]  # template vertices are ordered by class
    for i in range(k):
        for j in range(i + 1, k):
            if template.class_of[i] == template.class_of[j]:
                continue
            code = int(template.matrix[i, j])
            if code:
                other = 3 - code
                block = np.where(rng.random((L, L)) < p, code, other).astype(np.int8)
            else:
                block = np.where(rng.random((L, L)) < 0.5, 1, 2).astype(np.int8)
            rows = slice(starts[i], starts[i] + L)
            cols = slice(starts[j], starts[j] + L)
            mat[rows, cols] = block
            mat[cols, rows] = block.T
    host = ColouredTripartiteGraph(sizes, mat)
    clusters = [np.arange(starts[i], starts[i] + L) for i in range(k)]
    part = Partition(clusters, np.zeros(0, dtype=np.int64), [int(template.class_of[i]) for i in range(k)], L)
    return host, part


# -- exhaustive oracles ---------------------------------------------------------


def _edge_lists(G: ColouredTripartiteGraph, colour: Colour) -> list[list[int]]:
    nv = G.num_vertices
    return [[v for v in range(nv) if G.matrix[u, v] == int(colour)] for u in range(nv)]


def _plain_components(adj: list[list[int]]) -> tuple[list[int], list[bool]]:
    """Component label per vertex and, per label, whether it contains an odd cycle."""
    label = [-1] * len(adj)
    side = [0] * len(adj)
    odd: list[bool] = []
    for s in range(len(adj)):
        if label[s] >= 0:
            continue
        lab = len(odd)
        odd.append(False)
        label[s] = lab
        stack = [s]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if label[v] < 0:
                    label[v] = lab
                    side[v] = 1 - side[u]
                    stack.append(v)
                elif side[v] == side[u]:
                    odd[lab] = True
    return label, odd


def oracle_max_connected_matching(G: ColouredTripartiteGraph, colour, require_odd: bool = False) -> int:
    """Size of the largest connected (optionally odd) matching, by enumerating all matchings."""
    if G.num_vertices > 14:
        raise TooLarge("exhaustive matching oracle supports at most 14 vertices")
    colour = Colour.parse(colour)
    adj = _edge_lists(G, colour)
    label, odd = _plain_components(adj)
    nv = G.num_vertices
    best = 0
    matched = [False] * nv

    def search(u: int, size: int, comps: frozenset) -> None:
        nonlocal best
        while u < nv and matched[u]:
            u += 1
        if u == nv:
            if size and len(comps) == 1:
                (lab,) = comps
                if not require_odd or odd[lab]:
                    best = max(best, size)
            return
        search(u + 1, size, comps)
        matched[u] = True
        for v in adj[u]:
            if v > u and not matched[v]:
                matched[v] = True
                search(u + 1, size + 1, comps | {label[u]})
                matched[v] = False
        matched[u] = False

    search(0, 0, frozenset())
    return best


def oracle_max_fork_system(G: ColouredTripartiteGraph, colour, vertices, ratio: int) -> int:
    """Most prongs of a fork system inside the bipartite colour component ``vertices``.

    Every prong-side vertex is tried unused or attached to each neighbouring
    centre with spare capacity, for both choices of centre side.
    """
    vertices = sorted(int(v) for v in vertices)
    if len(vertices) > 14:
        raise TooLarge("exhaustive fork oracle supports at most 14 vertices")
    colour = Colour.parse(colour)
    inside = set(vertices)
    side = {vertices[0]: 0}
    stack = [vertices[0]]
    while stack:
        u = stack.pop()
        for v in vertices:
            if G.matrix[u, v] == int(colour):
                if v not in side:
                    side[v] = 1 - side[u]
                    stack.append(v)
                elif side[v] == side[u]:
                    raise BadArguments("component is not bipartite")
    if set(side) != inside:
        raise BadArguments("vertices do not form one component")
    best = 0
    for centre_side in (0, 1):
        centres = [v for v in vertices if side[v] == centre_side]
        prongs = [v for v in vertices if side[v] != centre_side]
        load = {v: 0 for v in centres}

        def go(i: int, got: int) -> None:
            nonlocal best
            if got + (len(prongs) - i) <= best:
                return
            if i == len(prongs):
                best = max(best, got)
                return
            p = prongs[i]
            for z in centres:
                if load[z] < ratio and G.matrix[p, z] == int(colour):
                    load[z] += 1
                    go(i + 1, got + 1)
                    load[z] -= 1
            go(i + 1, got)

        go(0, 0)
    return best


def oracle_tree_embedding(T: Tree, host: ColouredTripartiteGraph, colour) -> bool:
    """Exact search for a copy of ``T`` in the colour-``colour`` subgraph of ``host``."""
    if T.t > 12 or host.num_vertices > 18:
        raise TooLarge("tree embedding oracle supports |T| <= 12 and hosts with <= 18 vertices")
    colour = Colour.parse(colour)
    adj = _edge_lists(host, colour)
    order = T.bfs_order
    image = [-1] * T.t
    used = [False] * host.num_vertices

    def extend(pos: int) -> bool:
        if pos == len(order):
            return True
        x = order[pos]
        options = range(host.num_vertices) if pos == 0 else adj[image[T.parent[x]]]
        for v in options:
            if not used[v]:
                image[x] = v
                used[v] = True
                if extend(pos + 1):
                    return True
                used[v] = False
        image[x] = -1
        return False

    return extend(0)
