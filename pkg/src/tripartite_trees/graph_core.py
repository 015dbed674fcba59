"""Coloured tripartite graphs and the basic predicates on them.

Vertices are globally indexed ``0..N-1`` with class A first, then B, then C.
Edge colours live in a symmetric ``int8`` matrix (0 = absent, 1 = green,
2 = red); per-colour neighbourhoods are also cached as integer bitsets since
almost every higher-level routine is intersection-heavy.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import bitset
from .errors import (
    BadArguments,
    DuplicateEdge,
    EmptySide,
    IndexOutOfRange,
    IntraClassEdge,
    NotFound,
    OverlappingSets,
    UnbalancedClasses,
)

ABSENT = 0


class Colour(enum.IntEnum):
    GREEN = 1
    RED = 2

    @property
    def code(self) -> str:
        return "G" if self is Colour.GREEN else "R"

    def other(self) -> "Colour":
        return Colour.RED if self is Colour.GREEN else Colour.GREEN

    @classmethod
    def parse(cls, value) -> "Colour":
        if isinstance(value, Colour):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        key = str(value).strip().upper()
        if key in ("G", "GREEN"):
            return cls.GREEN
        if key in ("R", "RED"):
            return cls.RED
        raise ValueError(f"unknown colour {value!r}")


COLOURS = (Colour.GREEN, Colour.RED)


class ColouredTripartiteGraph:
    """Immutable 2-coloured tripartite graph.

    ``n_scale`` is the per-class size used for every ``eta * n`` threshold;
    it defaults to the largest class.
    """

    def __init__(self, class_sizes: Sequence[int], colours: np.ndarray, n_scale: int | None = None):
        sizes = tuple(int(s) for s in class_sizes)
        if len(sizes) != 3 or min(sizes) < 0:
            raise BadArguments(f"class_sizes must be three non-negative ints, got {class_sizes!r}")
        total = sum(sizes)
        mat = np.array(colours, dtype=np.int8, copy=True)
        if mat.shape != (total, total):
            raise BadArguments(f"colour matrix shape {mat.shape} does not match {total} vertices")
        if not np.array_equal(mat, mat.T):
            raise BadArguments("colour matrix is not symmetric")
        if np.any((mat < 0) | (mat > 2)):
            raise BadArguments("colour codes must be 0, 1 or 2")
        class_of = np.repeat(np.arange(3, dtype=np.int8), sizes)
        same = class_of[:, None] == class_of[None, :]
        if np.any(mat[same] != ABSENT):
            u, v = np.argwhere(same & (mat != ABSENT))[0]
            raise IntraClassEdge(f"edge {u}-{v} lies inside class {int(class_of[u])}")
        mat.setflags(write=False)
        class_of.setflags(write=False)
        self.class_sizes = sizes
        self.n_scale = int(n_scale) if n_scale is not None else max(sizes)
        self.matrix = mat
        self.class_of = class_of
        self._offsets = (0, sizes[0], sizes[0] + sizes[1], total)
        self._cache: dict = {}

    # -- basic shape -------------------------------------------------------
    @property
    def num_vertices(self) -> int:
        return self._offsets[3]

    def class_vertices(self, cls: int) -> range:
        return range(self._offsets[cls], self._offsets[cls + 1])

    @property
    def classes(self) -> tuple[range, range, range]:
        return tuple(self.class_vertices(i) for i in range(3))

    def colour(self, u: int, v: int) -> Colour | None:
        code = int(self.matrix[u, v])
        return Colour(code) if code else None

    def has_edge(self, u: int, v: int, colour: Colour | None = None) -> bool:
        code = int(self.matrix[u, v])
        return code != ABSENT if colour is None else code == int(Colour.parse(colour))

    # -- neighbourhoods ----------------------------------------------------
    def adjacency(self, colour: Colour | None = None) -> np.ndarray:
        colour = None if colour is None else Colour.parse(colour)
        key = ("adj", colour)
        if key not in self._cache:
            adj = self.matrix != ABSENT if colour is None else self.matrix == int(colour)
            adj.setflags(write=False)
            self._cache[key] = adj
        return self._cache[key]

    def nbr_bits(self, colour: Colour | None = None) -> list[int]:
        """Per-vertex neighbourhood bitsets in the given colour (any colour if None)."""
        colour = None if colour is None else Colour.parse(colour)
        key = ("bits", colour)
        if key not in self._cache:
            adj = self.adjacency(colour)
            self._cache[key] = [bitset.from_mask(row) for row in adj]
        return self._cache[key]

    def neighbours(self, u: int, colour: Colour | None = None) -> np.ndarray:
        return np.flatnonzero(self.adjacency(colour)[u])

    def degree(self, u: int, colour: Colour | None = None) -> int:
        return int(self.adjacency(colour)[u].sum())

    def edges(self, colour: Colour | None = None) -> Iterator[tuple[int, int]]:
        us, vs = np.nonzero(np.triu(self.adjacency(colour)))
        for u, v in zip(us.tolist(), vs.tolist()):
            yield u, v

    def num_edges(self, colour: Colour | None = None) -> int:
        return int(np.triu(self.adjacency(colour)).sum())

    def coloured_edges(self) -> list[tuple[int, int, Colour]]:
        us, vs = np.nonzero(np.triu(self.matrix))
        return [(u, v, Colour(int(self.matrix[u, v]))) for u, v in zip(us.tolist(), vs.tolist())]

    def components(self, colour: Colour) -> list["ColourComponent"]:
        colour = Colour.parse(colour)
        key = ("components", colour)
        if key not in self._cache:
            self._cache[key] = _compute_components(self, colour)
        return self._cache[key]

    def component_index(self, colour: Colour) -> dict[int, int]:
        colour = Colour.parse(colour)
        key = ("component_index", colour)
        if key not in self._cache:
            self._cache[key] = {v: comp.index for comp in self.components(colour) for v in comp.vertices}
        return self._cache[key]

    def __repr__(self) -> str:
        return (
            f"ColouredTripartiteGraph(classes={self.class_sizes}, "
            f"green={self.num_edges(Colour.GREEN)}, red={self.num_edges(Colour.RED)})"
        )


def build_graph(
    class_sizes: Sequence[int],
    coloured_edge_list: Iterable[tuple[int, int, object]],
    n_scale: int | None = None,
) -> ColouredTripartiteGraph:
    sizes = tuple(int(s) for s in class_sizes)
    total = sum(sizes)
    class_of = np.repeat(np.arange(3), sizes)
    mat = np.zeros((total, total), dtype=np.int8)
    codes_seen: dict = {}

    def code_of(c) -> int:
        if c not in codes_seen:
            codes_seen[c] = int(Colour.parse(c))
        return codes_seen[c]

    rows = [(int(u), int(v), code_of(c)) for u, v, c in coloured_edge_list]
    if rows:
        arr = np.array(rows, dtype=np.int64)
        us, vs, codes = arr[:, 0], arr[:, 1], arr[:, 2]
        bad = (us < 0) | (us >= total) | (vs < 0) | (vs >= total)
        if bad.any():
            i = int(np.argmax(bad))
            raise IndexOutOfRange(f"edge {us[i]}-{vs[i]} outside 0..{total - 1}")
        inside = class_of[us] == class_of[vs]
        if inside.any():
            i = int(np.argmax(inside))
            raise IntraClassEdge(f"edge {us[i]}-{vs[i]} lies inside class {int(class_of[us[i]])}")
        keys = np.minimum(us, vs) * total + np.maximum(us, vs)
        order = np.lexsort((codes, keys))
        clash = (keys[order][1:] == keys[order][:-1]) & (codes[order][1:] != codes[order][:-1])
        if clash.any():
            i = int(order[int(np.argmax(clash))])
            raise DuplicateEdge(f"edge {us[i]}-{vs[i]} listed with conflicting colours")
        mat[us, vs] = codes
        mat[vs, us] = codes
    return ColouredTripartiteGraph(sizes, mat, n_scale=n_scale)


def _as_index(vertices: Iterable[int]) -> np.ndarray:
    return np.fromiter((int(v) for v in vertices), dtype=np.int64)


def density(G: ColouredTripartiteGraph, U, W, colour: Colour | None = None) -> Fraction:
    """Edges between U and W over |U||W|; restricted to one colour if given."""
    U, W = _as_index(U), _as_index(W)
    if len(U) == 0 or len(W) == 0:
        raise EmptySide("density needs two nonempty sides")
    if np.intersect1d(U, W).size:
        raise OverlappingSets("density needs disjoint sides")
    edges = int(G.adjacency(colour)[np.ix_(U, W)].sum())
    return Fraction(edges, len(U) * len(W))


def density_c(G: ColouredTripartiteGraph, U, W, colour) -> Fraction:
    return density(G, U, W, Colour.parse(colour))


def is_eta_complete(G: ColouredTripartiteGraph, D, D2, eta: float, colour: Colour | None = None) -> bool:
    """Every vertex misses at most ``eta * n_scale`` vertices of the other side.

    With ``colour`` given, every present edge between the sides must also
    carry that colour.
    """
    D, D2 = _as_index(D), _as_index(D2)
    if np.intersect1d(D, D2).size:
        raise OverlappingSets("eta-completeness is defined for disjoint sets")
    if len(D) == 0 or len(D2) == 0:
        return True
    sub = G.matrix[np.ix_(D, D2)]
    present = sub != ABSENT
    slack = eta * G.n_scale
    if (len(D2) - present.sum(axis=1)).max() > slack:
        return False
    if (len(D) - present.sum(axis=0)).max() > slack:
        return False
    if colour is not None and np.any(sub[present] != int(colour)):
        return False
    return True


def in_class_K_eta(G: ColouredTripartiteGraph, eta: float) -> bool:
    """Minimum degree strictly above ``(2 - eta) n`` on balanced classes."""
    if len(set(G.class_sizes)) != 1:
        raise UnbalancedClasses(f"class sizes {G.class_sizes} are not equal")
    n = G.class_sizes[0]
    if G.num_vertices == 0:
        return True
    degrees = G.adjacency().sum(axis=1)
    return bool(degrees.min() > (2 - eta) * n)


# -- colour components -------------------------------------------------------


@dataclass(frozen=True)
class ColourComponent:
    colour: Colour
    index: int
    vertices: frozenset
    is_odd: bool
    odd_cycle_witness: tuple | None = None
    # bipartition classes (even components only)
    sides: tuple[frozenset, frozenset] | None = field(default=None, compare=False)

    def side_of(self, v: int) -> int:
        if self.sides is None:
            raise ValueError("odd components have no bipartition")
        return 0 if v in self.sides[0] else 1


def _compute_components(G: ColouredTripartiteGraph, colour: Colour) -> list[ColourComponent]:
    nbrs = G.nbr_bits(colour)
    touched = [v for v in range(G.num_vertices) if nbrs[v]]
    unvisited = bitset.from_iter(touched)
    comps: list[ColourComponent] = []
    while unvisited:
        root = bitset.lowest(unvisited)
        unvisited &= ~(1 << root)
        parent = {root: None}
        depth = {root: 0}
        order = [root]
        side_bits = [1 << root, 0]
        queue = deque([root])
        while queue:
            u = queue.popleft()
            new = nbrs[u] & unvisited
            unvisited &= ~new
            for w in bitset.iter_bits(new):
                parent[w] = u
                depth[w] = depth[u] + 1
                side_bits[depth[w] & 1] |= 1 << w
                order.append(w)
                queue.append(w)
        witness = None
        for u in order:
            clash = nbrs[u] & side_bits[depth[u] & 1]
            if clash:
                witness = _odd_cycle(u, bitset.lowest(clash), parent, depth)
                break
        verts = frozenset(order)
        sides = None
        if witness is None:
            sides = (frozenset(bitset.iter_bits(side_bits[0])), frozenset(bitset.iter_bits(side_bits[1])))
        comps.append(ColourComponent(colour, len(comps), verts, witness is not None, witness, sides))
    return comps


def _odd_cycle(u: int, w: int, parent: dict, depth: dict) -> tuple:
    """Closed odd walk through the same-parity edge ``uw`` of a BFS tree."""
    left, right = [u], [w]
    a, b = u, w
    while depth[a] > depth[b]:
        a = parent[a]
        left.append(a)
    while depth[b] > depth[a]:
        b = parent[b]
        right.append(b)
    while a != b:
        a, b = parent[a], parent[b]
        left.append(a)
        right.append(b)
    # left ends at the common ancestor; right too, drop the duplicate
    return tuple(left + right[-2::-1])


def colour_components(G: ColouredTripartiteGraph, colour) -> list[ColourComponent]:
    return list(G.components(Colour.parse(colour)))


def is_valid_odd_cycle(G: ColouredTripartiteGraph, cycle: Sequence[int], colour: Colour) -> bool:
    if len(cycle) % 2 == 0 or len(cycle) < 3:
        return False
    return all(G.has_edge(cycle[i], cycle[(i + 1) % len(cycle)], colour) for i in range(len(cycle)))


# -- small witnesses ---------------------------------------------------------


class WitnessKind(enum.Enum):
    COMMON_NEIGHBOUR = "CommonNeighbour"
    TRIANGLE = "Triangle"
    C5 = "C5"


def find_small_witness(G: ColouredTripartiteGraph, kind, **args):
    """Lowest-index-first search for a common neighbour, triangle or 5-cycle.

    CommonNeighbour: ``target`` (candidate set), ``pair`` (two vertices),
    optional ``colour``. Triangle: ``sets`` = (A', B', C'), optional
    ``colour``. C5: ``colour``, ``edge`` = (v, w), ``sets`` = (D1, D2, D3);
    the cycle returned is ``v, d1, d2, d3, w``.
    """
    kind = WitnessKind(kind) if not isinstance(kind, WitnessKind) else kind
    colour = Colour.parse(args["colour"]) if args.get("colour") is not None else None
    nbrs = G.nbr_bits(colour)
    try:
        if kind is WitnessKind.COMMON_NEIGHBOUR:
            u, w = args["pair"]
            hit = nbrs[u] & nbrs[w] & bitset.from_iter(args["target"])
            hit &= ~((1 << u) | (1 << w))
            if hit:
                return bitset.lowest(hit)
        elif kind is WitnessKind.TRIANGLE:
            A, B, C = (sorted(set(s)) for s in args["sets"])
            C_bits = bitset.from_iter(C)
            for a in A:
                for b in bitset.iter_bits(nbrs[a] & bitset.from_iter(B)):
                    common = nbrs[a] & nbrs[b] & C_bits
                    if common:
                        return (a, b, bitset.lowest(common))
        elif kind is WitnessKind.C5:
            if colour is None:
                raise BadArguments("C5 search needs a colour")
            v, w = args["edge"]
            if not G.has_edge(v, w, colour):
                raise BadArguments(f"{v}-{w} is not a {colour.name} edge")
            D1, D2, D3 = (bitset.from_iter(s) for s in args["sets"])
            used = (1 << v) | (1 << w)
            D1, D2, D3 = D1 & ~used, D2 & ~used, D3 & ~used
            for d1 in bitset.iter_bits(nbrs[v] & D1):
                for d3 in bitset.iter_bits(nbrs[w] & D3 & ~(1 << d1)):
                    mid = nbrs[d1] & nbrs[d3] & D2 & ~((1 << d1) | (1 << d3))
                    if mid:
                        return (v, d1, bitset.lowest(mid), d3, w)
    except KeyError as exc:
        raise BadArguments(f"missing argument {exc} for {kind.value}") from None
    raise NotFound(f"no {kind.value} witness")
