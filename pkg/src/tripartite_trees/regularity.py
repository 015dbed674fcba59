"""Partitions, sampled regularity audits and reduced coloured graphs.

No regularity lemma is run here: partitions come from the caller (or an
equitable split), and each cluster pair is audited by sampling subset pairs
of the boundary size ceil(eps * L).  A failed audit carries the offending
subset pair, so failures are certified while passes are only evidence.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BadArguments, TooFewVertices, TooManyIrregularPairs
from .graph_core import Colour, ColouredTripartiteGraph, in_class_K_eta


@dataclass
class Partition:
    clusters: list[np.ndarray]
    bin: np.ndarray
    class_of: list[int]
    L: int

    def __post_init__(self):
        self.clusters = [np.sort(np.asarray(c, dtype=np.int64)) for c in self.clusters]
        self.bin = np.sort(np.asarray(self.bin, dtype=np.int64))
        self.class_of = [int(c) for c in self.class_of]
        if len(self.clusters) != len(self.class_of):
            raise BadArguments("class_of needs one entry per cluster")
        if any(len(c) != self.L for c in self.clusters):
            raise BadArguments("clusters must all have size L")

    @property
    def k(self) -> int:
        return len(self.clusters)

    def cluster_index(self, num_vertices: int) -> np.ndarray:
        """Cluster number of every host vertex (-1 for the bin)."""
        out = np.full(num_vertices, -1, dtype=np.int64)
        for i, c in enumerate(self.clusters):
            out[c] = i
        return out

    def per_class(self) -> list[int]:
        return [self.class_of.count(c) for c in range(3)]

    def problems(self, G: ColouredTripartiteGraph, eps: float | None = None) -> list[str]:
        out = []
        seen = np.zeros(G.num_vertices, dtype=np.int64)
        for c in self.clusters:
            seen[c] += 1
        seen[self.bin] += 1
        if np.any(seen != 1):
            out.append("clusters and bin do not partition the vertex set")
        for i, c in enumerate(self.clusters):
            if len(c) and np.any(G.class_of[c] != self.class_of[i]):
                out.append(f"cluster {i} leaves host class {self.class_of[i]}")
        if eps is not None and len(self.bin) > eps * G.num_vertices:
            out.append(f"bin of {len(self.bin)} exceeds eps|V|")
        return out

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "clusters": [c.tolist() for c in self.clusters],
            "bin": self.bin.tolist(),
            "class_of": self.class_of,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Partition":
        return cls([np.asarray(c) for c in data["clusters"]], np.asarray(data["bin"], dtype=np.int64),
                   data["class_of"], int(data["L"]))


def equipartition(host: ColouredTripartiteGraph, k: int, seed=None) -> Partition:
    """Split each host class into k/3 equal clusters; leftovers go to the bin.

    With ``seed=None`` the clusters are contiguous index blocks, otherwise each
    class is shuffled first.
    """
    if k <= 0 or k % 3:
        raise BadArguments("k must be a positive multiple of 3")
    per = k // 3
    if min(host.class_sizes) < per:
        raise TooFewVertices(f"each class needs at least {per} vertices")
    L = min(host.class_sizes) // per
    rng = None if seed is None else np.random.default_rng(seed)
    clusters, class_of, leftovers = [], [], []
    for cls in range(3):
        verts = np.arange(host.class_vertices(cls).start, host.class_vertices(cls).stop)
        if rng is not None:
            verts = rng.permutation(verts)
        for j in range(per):
            clusters.append(verts[j * L : (j + 1) * L])
            class_of.append(cls)
        leftovers.append(verts[per * L :])
    return Partition(clusters, np.concatenate(leftovers), class_of, L)


# -- audits -------------------------------------------------------------------


@dataclass
class PairAudit:
    i: int
    j: int
    density: float
    colour_density: dict
    deviation: float
    nontypical: int
    verdict: bool
    eps: float
    d: float
    witness: tuple | None = None  # (U', W') realising a deviation above eps

    def to_json(self) -> dict:
        return {"i": self.i, "j": self.j, "d": round(self.density, 6), "dev": round(self.deviation, 6),
                "verdict": "Pass" if self.verdict else "Fail"}


def _subset(rng, pool: np.ndarray, size: int) -> np.ndarray | None:
    if len(pool) < size:
        return None
    return np.sort(rng.choice(pool, size=size, replace=False))


def audit_pair(
    host: ColouredTripartiteGraph,
    colour,
    Vi: Sequence[int],
    Vj: Sequence[int],
    eps: float,
    d: float,
    num_samples: int = 200,
    seed=None,
    ij: tuple[int, int] = (0, 1),
) -> PairAudit:
    """Sampled (eps, d)-regularity audit of the pair (Vi, Vj) in one colour.

    ``colour=None`` audits the underlying uncoloured pair.  Besides uniform
    samples, a share of the samples is built from neighbourhoods of random
    pivots, which finds planted block structure that uniform samples miss.
    """
    colour = None if colour is None else Colour.parse(colour)
    Vi = np.asarray(Vi, dtype=np.int64)
    Vj = np.asarray(Vj, dtype=np.int64)
    if Vi.size == 0 or Vj.size == 0:
        raise BadArguments("audit needs two non-empty clusters")
    if np.any(host.class_of[Vi][:, None] == host.class_of[Vj][None, :]):
        raise BadArguments("audited clusters must lie in distinct classes")
    rng = np.random.default_rng(seed)
    full = host.matrix[np.ix_(Vi, Vj)]
    sub = (full != 0) if colour is None else (full == int(colour))
    dens = float(sub.mean())
    colour_density = {c.code: float((full == int(c)).mean()) for c in (Colour.GREEN, Colour.RED)}
    si = max(1, math.ceil(eps * len(Vi)))
    sj = max(1, math.ceil(eps * len(Vj)))
    rows_all = np.arange(len(Vi))
    cols_all = np.arange(len(Vj))

    worst, witness = 0.0, None

    def consider(U, W):
        nonlocal worst, witness
        if U is None or W is None:
            return
        dev = abs(float(sub[np.ix_(U, W)].mean()) - dens)
        if dev > worst:
            worst = dev
            witness = (Vi[U].tolist(), Vj[W].tolist())

    structured = num_samples // 4
    for _ in range(num_samples - structured):
        consider(_subset(rng, rows_all, si), _subset(rng, cols_all, sj))
    for s in range(structured):
        u = int(rng.integers(len(Vi)))
        want = s % 2 == 0  # alternate neighbour / non-neighbour pivots
        partners = np.flatnonzero(sub[u] == want)
        if len(partners) <= sj:
            continue
        w = int(rng.choice(partners))
        # leave both pivots out so their own rows do not bias the sample
        W = _subset(rng, partners[partners != w], sj)
        back = np.flatnonzero(sub[:, w] == want)
        U = _subset(rng, back[back != u], si)
        consider(U, W)

    X = _subset(rng, cols_all, sj)
    nontypical = int(np.sum(sub[:, X].sum(axis=1) < (d - eps) * len(X)))
    verdict = worst <= eps and dens >= d and nontypical < eps * len(Vj)
    return PairAudit(ij[0], ij[1], dens, colour_density, worst, nontypical, bool(verdict), eps, d,
                     witness if worst > eps else None)


def verify_audit_witness(host: ColouredTripartiteGraph, colour, Vi, Vj, witness, eps: float) -> bool:
    """Recompute both densities of a failure witness from scratch."""
    colour = None if colour is None else Colour.parse(colour)
    U, W = witness

    def dens(X, Y):
        block = host.matrix[np.ix_(np.asarray(X), np.asarray(Y))]
        return float(((block != 0) if colour is None else (block == int(colour))).mean())

    return abs(dens(U, W) - dens(Vi, Vj)) > eps


# -- reduced graph ---------------------------------------------------------------


@dataclass
class ReducedGraph:
    graph: ColouredTripartiteGraph
    partition: Partition
    audits: list[PairAudit] = field(default_factory=list)
    removed: list[int] = field(default_factory=list)  # original cluster ids sent to the bin

    def report_lines(self) -> list[str]:
        return [json.dumps(a.to_json()) for a in self.audits]


def reduced_colour_graph(
    host: ColouredTripartiteGraph,
    partition: Partition,
    eps: float,
    d: float = 0.0,
    num_samples: int = 200,
    seed=None,
    green_threshold: float = 0.5,
    eta_prime: float | None = None,
) -> ReducedGraph:
    """Reduced graph over the clusters of ``partition``.

    A cross-class pair becomes an edge when its uncoloured audit passes at
    (eps, d); the edge is green when the green density reaches
    ``green_threshold`` and red otherwise.  Clusters failing more than
    sqrt(eps) * k audits go to the bin, then further clusters are binned so
    every class keeps the same number of clusters.
    """
    k = partition.k
    audits: list[PairAudit] = []
    fails = [0] * k
    edge_colour: dict[tuple[int, int], int] = {}
    base = np.random.default_rng(seed)
    pair_seeds = base.integers(0, 2**63 - 1, size=(k, k))
    for i in range(k):
        for j in range(i + 1, k):
            if partition.class_of[i] == partition.class_of[j]:
                continue
            a = audit_pair(host, None, partition.clusters[i], partition.clusters[j], eps, d,
                           num_samples, int(pair_seeds[i, j]), (i, j))
            audits.append(a)
            if a.verdict:
                green = a.colour_density[Colour.GREEN.code]
                edge_colour[(i, j)] = int(Colour.GREEN if green >= green_threshold else Colour.RED)
            else:
                fails[i] += 1
                fails[j] += 1
    limit = math.sqrt(eps) * k
    drop = {i for i in range(k) if fails[i] > limit}
    per_class = [[i for i in range(k) if partition.class_of[i] == c and i not in drop] for c in range(3)]
    keep_each = min(len(p) for p in per_class)
    for members in per_class:
        # most failures first, then highest index
        ranked = sorted(members, key=lambda i: (-fails[i], -i))
        drop.update(ranked[: len(members) - keep_each])
    if keep_each == 0:
        raise TooManyIrregularPairs("every cluster of some class failed too many audits")
    kept = [i for c in range(3) for i in range(k) if partition.class_of[i] == c and i not in drop]
    new_index = {old: new for new, old in enumerate(kept)}
    m = len(kept)
    mat = np.zeros((m, m), dtype=np.int8)
    for (i, j), code in edge_colour.items():
        if i in new_index and j in new_index:
            mat[new_index[i], new_index[j]] = mat[new_index[j], new_index[i]] = code
    graph = ColouredTripartiteGraph((keep_each,) * 3, mat)
    removed = sorted(drop)
    new_bin = np.concatenate([partition.bin] + [partition.clusters[i] for i in removed])
    new_part = Partition([partition.clusters[i] for i in kept], new_bin,
                         [partition.class_of[i] for i in kept], partition.L)
    if eta_prime is not None and not in_class_K_eta(graph, eta_prime):
        raise TooManyIrregularPairs(f"reduced graph on {m} clusters is not in K_eta for eta={eta_prime}")
    return ReducedGraph(graph, new_part, audits, removed)


def write_audit_report(audits: Iterable[PairAudit], path) -> None:
    with open(path, "w") as fh:
        for a in audits:
            fh.write(json.dumps(a.to_json()) + "\n")
