"""Greedy embedding of a tree with a valid cluster assignment into a host.

Each cluster is split into an embedding space (for shrub vertices) and a
smaller connecting space (for cut vertices).  Vertices are processed in the
decomposition order; every image is chosen typical with respect to the
candidate sets of the still unembedded neighbours, and each cut vertex
reserves a small pool of its neighbours for its non-cut children until its
child shrubs are finished.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import bitset
from .errors import BadArguments, HypothesisViolated, NoTypicalVertex, TargetTooSmall
from .graph_core import Colour, ColouredTripartiteGraph
from .regularity import Partition, audit_pair
from .tree_tools import Tree, TreeDecomposition


def typical_vertices(
    host: ColouredTripartiteGraph, colour, pool: Sequence[int], X: Sequence[int], d: float, eps: float, L: int | None = None
) -> list[int]:
    """Vertices of ``pool`` with at least (d - eps)|X| colour neighbours in ``X``.

    ``L`` is the cluster size used for the minimum target size eps*L
    (defaults to |X|, which accepts any non-empty target).
    """
    colour = Colour.parse(colour)
    X = np.asarray(list(X), dtype=np.int64)
    pool = np.asarray(list(pool), dtype=np.int64)
    if X.size == 0 or (L is not None and X.size < eps * L):
        raise TargetTooSmall(f"target of size {X.size} is below eps*L")
    counts = (host.matrix[np.ix_(pool, X)] == int(colour)).sum(axis=1)
    return pool[counts >= (d - eps) * X.size].tolist()


@dataclass
class Embedding:
    f: list[int]
    colour: Colour
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"f": list(self.f), "colour": self.colour.code}

    @classmethod
    def from_json(cls, data: dict) -> "Embedding":
        return cls([int(v) for v in data["f"]], Colour.parse(data["colour"]))


def feasibility(d: float, rho: float, eps: float, L: int, cut_size: int, S: int, Delta: int) -> dict:
    """Both sides of the embedding lemma's space inequality."""
    lhs = (d * rho / 10 - 10 * eps) * L
    rhs = cut_size + S + Delta
    return {"name": "(d*rho/10 - 10*eps)*L >= |C| + S + Delta", "lhs": lhs, "rhs": rhs, "holds": lhs >= rhs}


class _Engine:
    def __init__(self, T, D, h, host, partition, colour, d, eps, rho, Delta, instrument):
        self.T, self.D, self.h = T, D, h
        self.colour = colour
        self.d, self.eps, self.rho, self.Delta = d, eps, rho, Delta
        self.L = partition.L
        self.nbrs = host.nbr_bits(colour)
        self.cut = D.cut
        self.instrument = instrument
        star = int(math.floor(rho * self.L / 2))
        self.embed_space, self.connect_space = [], []
        for cl in partition.clusters:
            verts = sorted(int(v) for v in cl)
            split = len(verts) - star
            self.embed_space.append(bitset.from_iter(verts[:split]))
            self.connect_space.append(bitset.from_iter(verts[split:]))
        self.reservoir_size = math.ceil(5 * eps * self.L) + Delta
        self.used = 0
        self.reservoir: dict[int, int] = {}  # cluster -> reserved bitset
        self.reservoir_owner: dict[int, int] = {}  # non-cut child -> cluster whose reservoir it draws from
        self.explicit: dict[int, int] = {}  # candidate sets of vertices with an embedded parent
        self.f = [-1] * T.t
        self.min_slack = math.inf
        self.events: list[dict] = []

    # candidate set of an unembedded vertex, with used vertices removed
    def candidates(self, y: int) -> int:
        if y in self.explicit:
            return self.explicit[y] & ~self.used
        i = self.h[y]
        if y in self.cut:
            return self.connect_space[i] & ~self.used
        return self.embed_space[i] & ~self.used & ~self.reservoir.get(i, 0)

    def case_of(self, x: int) -> int:
        if x in self.cut:
            return 1
        p = self.D.parent[x]
        return 2 if p is not None and p in self.cut else 3

    def pending(self, x: int) -> list[int]:
        return [y for y in self.T.adj[x] if self.f[y] < 0]

    def choose(self, x: int) -> int:
        avail = self.candidates(x)
        size = bitset.count(avail)
        self.min_slack = min(self.min_slack, size - 4 * self.eps * self.L)
        targets = {}
        for y in self.pending(x):
            # children sharing cluster and cut status share a candidate set
            key = (self.h[y], y in self.cut)
            targets.setdefault(key, self.candidates(y))
        need = [(X, (self.d - self.eps) * bitset.count(X)) for X in targets.values()]
        for v in bitset.iter_bits(avail):
            nb = self.nbrs[v]
            if all(bitset.count(nb & X) >= bound for X, bound in need):
                return v
        raise NoTypicalVertex(
            f"no typical image for tree vertex {x} (case {self.case_of(x)}, {size} candidates)",
            self.dump(x, size, targets),
        )

    def dump(self, x: int, size: int, targets: dict) -> dict:
        loads = {}
        for v in range(self.T.t):
            if self.f[v] >= 0:
                loads[self.h[v]] = loads.get(self.h[v], 0) + 1
        return {
            "vertex": x,
            "case": self.case_of(x),
            "cluster": self.h[x],
            "is_cut": x in self.cut,
            "candidates": size,
            "pending_targets": [{"cluster": k[0], "cut": k[1], "size": bitset.count(X)} for k, X in targets.items()],
            "used": bitset.count(self.used),
            "embedded": sum(1 for v in self.f if v >= 0),
            "loads": {str(k): v for k, v in sorted(loads.items())},
            "reservoirs": {str(i): bitset.count(R) for i, R in self.reservoir.items()},
        }

    def place(self, x: int) -> None:
        v = self.choose(x)
        self.f[x] = v
        self.used |= 1 << v
        self.explicit.pop(x, None)
        kids = self.pending(x)
        for y in kids:
            self.explicit[y] = self.candidates(y) & self.nbrs[v]
        if x in self.cut:
            self.carve(x, v, kids)

    def carve(self, x: int, v: int, kids: list[int]) -> None:
        by_cluster: dict[int, list[int]] = {}
        for y in kids:
            if y not in self.cut:
                by_cluster.setdefault(self.h[y], []).append(y)
        for i, ys in sorted(by_cluster.items()):
            pool = self.embed_space[i] & ~self.used & self.nbrs[v]
            if bitset.count(pool) < self.reservoir_size:
                raise NoTypicalVertex(
                    f"cannot reserve {self.reservoir_size} vertices in cluster {i} for cut vertex {x}",
                    self.dump(x, bitset.count(pool), {}),
                )
            R = 0
            for _, w in zip(range(self.reservoir_size), bitset.iter_bits(pool)):
                R |= 1 << w
            self.reservoir[i] = R
            for y in ys:
                self.explicit[y] = R
                self.reservoir_owner[y] = i
            for z, cand in self.explicit.items():
                if self.reservoir_owner.get(z) != i and z not in self.cut:
                    self.explicit[z] = cand & ~R
        if self.instrument:
            assert len(self.reservoir) <= 2, "more than two active reservoirs"
            assert all(bitset.count(R) == self.reservoir_size for R in self.reservoir.values())

    def release(self) -> None:
        self.reservoir.clear()
        self.reservoir_owner.clear()

    def run(self) -> list[int]:
        order = self.D.order
        for pos, x in enumerate(order):
            if x in self.cut and self.reservoir:
                self.release()
            self.place(x)
        self.release()
        return self.f


def embed(
    T: Tree,
    D: TreeDecomposition,
    h: Sequence[int],
    host: ColouredTripartiteGraph,
    partition: Partition,
    colour,
    d: float,
    eps: float,
    rho: float,
    Delta: int | None = None,
    audit_samples: int = 200,
    audit_eps: float | None = None,
    enforce_inequality: bool = False,
    instrument: bool = False,
    seed=None,
) -> Embedding:
    """Embed ``T`` into the colour-``colour`` subgraph following the assignment ``h``.

    Every cluster pair used by a tree edge is audited first (``audit_eps``
    defaults to ``eps``; ``audit_samples=0`` skips the audit).  The space
    inequality of the embedding lemma is always evaluated and reported in
    ``stats``; it is only enforced when ``enforce_inequality`` is set.
    """
    colour = Colour.parse(colour)
    Delta = T.max_degree if Delta is None else int(Delta)
    if D.tree is not T and D.tree.edges() != T.edges():
        raise BadArguments("decomposition belongs to a different tree")
    if len(h) != T.t:
        raise BadArguments("assignment length differs from the tree size")
    h = [int(c) for c in h]
    if any(not 0 <= c < partition.k for c in h):
        raise BadArguments("assignment uses an unknown cluster")
    if T.max_degree > Delta:
        raise HypothesisViolated(f"tree has maximum degree {T.max_degree} > Delta={Delta}")
    L = partition.L
    cap = (1 - rho) * (1 - eps) * L
    loads = [0] * partition.k
    for c in h:
        loads[c] += 1
    over = [i for i, load in enumerate(loads) if not load < cap]
    if over:
        raise HypothesisViolated(f"clusters {over} receive at least (1-rho)(1-eps)L = {cap:.1f} vertices")
    used_pairs = set()
    for u, v in T.edges():
        a, b = h[u], h[v]
        if partition.class_of[a] == partition.class_of[b]:
            raise HypothesisViolated(f"edge {u}-{v} is mapped inside host class {partition.class_of[a]}")
        used_pairs.add((min(a, b), max(a, b)))
    for x in range(T.t):
        if len({h[y] for y in T.adj[x]}) > 2:
            raise HypothesisViolated(f"neighbours of tree vertex {x} use more than two clusters")
    feas = feasibility(d, rho, eps, L, len(D.cut), D.S, Delta)
    if enforce_inequality and not feas["holds"]:
        raise HypothesisViolated(f"space inequality fails: {feas['lhs']:.2f} < {feas['rhs']}")
    audits = []
    if audit_samples:
        a_eps = eps if audit_eps is None else audit_eps
        rng = np.random.default_rng(seed)
        for a, b in sorted(used_pairs):
            res = audit_pair(host, colour, partition.clusters[a], partition.clusters[b], a_eps, d,
                             audit_samples, int(rng.integers(2**63 - 1)), (a, b))
            audits.append(res.to_json())
            if not res.verdict:
                raise HypothesisViolated(
                    f"cluster pair ({a},{b}) fails the ({a_eps},{d}) audit in colour {colour.code}: "
                    f"density {res.density:.3f}, deviation {res.deviation:.3f}"
                )
    engine = _Engine(T, D, h, host, partition, colour, d, eps, rho, Delta, instrument)
    f = engine.run()
    stats = {
        "feasibility": feas,
        "reservoir_size": engine.reservoir_size,
        "connecting_space": int(math.floor(rho * L / 2)),
        "min_candidate_slack": engine.min_slack if T.t else None,
        "audits": audits,
    }
    E = Embedding(f, colour, stats)
    problems = verify_embedding(T, E, host, partition, h)
    if problems:
        raise AssertionError("embedding failed its own verification: " + "; ".join(problems[:3]))
    return E


def verify_embedding(
    T: Tree, E: Embedding, host: ColouredTripartiteGraph, partition: Partition | None = None, h=None
) -> list[str]:
    """Violations of injectivity, adjacency, colour and cluster consistency (empty if valid)."""
    problems = []
    f = list(E.f)
    if len(f) != T.t:
        return [f"map has {len(f)} entries for a tree on {T.t} vertices"]
    nv = host.num_vertices
    if any(not 0 <= v < nv for v in f):
        return ["map leaves the host vertex range"]
    if len(set(f)) != len(f):
        problems.append("not injective")
    code = int(Colour.parse(E.colour))
    for u, v in T.edges():
        got = int(host.matrix[f[u], f[v]])
        if got == 0:
            problems.append(f"tree edge {u}-{v} maps to a non-edge")
        elif got != code:
            problems.append(f"tree edge {u}-{v} maps to an edge of the wrong colour")
    if partition is not None and h is not None:
        where = partition.cluster_index(nv)
        for x in range(T.t):
            if where[f[x]] != h[x]:
                problems.append(f"tree vertex {x} lands outside cluster {h[x]}")
                break
    return problems


def dump_state(err: NoTypicalVertex) -> str:
    return json.dumps(err.state, sort_keys=True)
