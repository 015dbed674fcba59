"""Extremal witnesses, certificates and the constructions that produce them.

Pyramid and spider configurations are carried by witnesses (vertex sets plus
colours). The handlers turn a valid witness into a matching/fork-system
certificate by greedy steps; ``certify_good_or_odd`` prefers exact search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from . import bitset
from .errors import ConstructionFailed, HypothesisViolated, NotFound, PreconditionError
from .graph_core import Colour, ColouredTripartiteGraph, in_class_K_eta, is_eta_complete
from .structures import (
    ForkSystem,
    Matching,
    greedy_bipartite_matching,
    make_matching,
    max_connected_matching,
    max_fork_system,
    validate_fork_system,
    validate_matching,
)


def as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x))


def scaled_ceil(factor, n: int) -> int:
    """Integer threshold ``ceil(factor * n)``, computed exactly."""
    return math.ceil(as_fraction(factor) * n)


def odd_threshold(eta_prime, n: int) -> int:
    return scaled_ceil((1 - as_fraction(eta_prime)) * Fraction(3, 4), n)


def good_thresholds(eta_prime, n: int) -> tuple[int, int, int]:
    keep = 1 - as_fraction(eta_prime)
    return scaled_ceil(keep, n), scaled_ceil(keep * Fraction(3, 2), n), 3


# -- witnesses ------------------------------------------------------------------


def _fs(vs: Iterable[int]) -> frozenset:
    return frozenset(int(v) for v in vs)


@dataclass(frozen=True)
class PyramidWitness:
    D1: frozenset
    D2: frozenset
    D1p: frozenset
    D2p: frozenset
    c: Colour
    c2: Colour
    mode: str  # "tunnel" or "crossing"
    eta: float

    kind = "pyramid"

    def to_json(self) -> dict:
        return {
            "kind": "pyramid",
            "D1": sorted(self.D1),
            "D2": sorted(self.D2),
            "D1p": sorted(self.D1p),
            "D2p": sorted(self.D2p),
            "c": self.c.code,
            "c2": self.c2.code,
            "mode": self.mode,
            "eta": self.eta,
        }


SPIDER_SETS = ("A1", "A2", "B1", "B2", "C1", "C2", "A_B", "A_C", "B_A", "B_C", "C_A", "C_B", "C_C")


@dataclass(frozen=True)
class SpiderWitness:
    A1: frozenset
    A2: frozenset
    B1: frozenset
    B2: frozenset
    C1: frozenset
    C2: frozenset
    A_B: frozenset
    A_C: frozenset
    B_A: frozenset
    B_C: frozenset
    C_A: frozenset
    C_B: frozenset
    C_C: frozenset
    c: Colour
    eta: float
    classes: tuple[int, int, int] = (0, 1, 2)  # host class playing A, B, C

    kind = "spider"

    @property
    def side1(self) -> frozenset:
        return self.A1 | self.B1 | self.C1

    @property
    def side2(self) -> frozenset:
        return self.A2 | self.B2 | self.C2

    def to_json(self) -> dict:
        out = {"kind": "spider", "c": self.c.code, "eta": self.eta, "classes": list(self.classes)}
        for name in SPIDER_SETS:
            out[name] = sorted(getattr(self, name))
        return out


ExtremalWitness = PyramidWitness | SpiderWitness


def witness_from_json(data: dict) -> ExtremalWitness:
    if data["kind"] == "pyramid":
        return PyramidWitness(
            _fs(data["D1"]), _fs(data["D2"]), _fs(data["D1p"]), _fs(data["D2p"]),
            Colour.parse(data["c"]), Colour.parse(data["c2"]), data["mode"], float(data["eta"]),
        )
    if data["kind"] == "spider":
        sets = {name: _fs(data[name]) for name in SPIDER_SETS}
        return SpiderWitness(**sets, c=Colour.parse(data["c"]), eta=float(data["eta"]),
                             classes=tuple(data.get("classes", (0, 1, 2))))
    raise PreconditionError(f"unknown witness kind {data['kind']!r}")


def validate_witness(G: ColouredTripartiteGraph, W: ExtremalWitness) -> tuple[bool, list[str]]:
    problems = _pyramid_violations(G, W) if isinstance(W, PyramidWitness) else _spider_violations(G, W)
    return not problems, problems


def _disjoint(named: dict) -> list[str]:
    out, names = [], list(named)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            if named[a] & named[b]:
                out.append(f"{a} and {b} intersect")
    return out


def _pyramid_violations(G, W: PyramidWitness) -> list[str]:
    n, eta = G.n_scale, as_fraction(W.eta)
    sets = {"D1": W.D1, "D2": W.D2, "D1'": W.D1p, "D2'": W.D2p}
    problems = _disjoint(sets)
    if problems:
        return problems
    for name, s in sets.items():
        if len(s) > n:
            problems.append(f"|{name}| exceeds n")
        if not all(0 <= v < G.num_vertices for v in s):
            problems.append(f"{name} has vertices outside the graph")
    if problems:
        return problems
    for name in ("D1", "D2"):
        if len(sets[name]) < (1 - eta) * n:
            problems.append(f"|{name}| too small")
    if len(W.D1p) + len(W.D2p) < (1 - eta) * n:
        problems.append("|D1'|+|D2'| too small")
    for name in ("D1'", "D2'"):
        if 0 < len(sets[name]) < 2 * eta * n:
            problems.append(f"{name} is negligible but not empty")
    checks = [
        ("D1", "D1'", W.c), ("D2", "D2'", W.c),
        ("D1", "D2'", None), ("D2", "D1'", None), ("D1", "D2", None),
    ]
    if W.mode == "tunnel":
        checks.append(("D1", "D2", W.c2))
    elif W.mode == "crossing":
        checks += [("D1", "D2'", W.c2), ("D1'", "D2", W.c2)]
    else:
        problems.append(f"unknown mode {W.mode!r}")
    for a, b, colour in checks:
        if not is_eta_complete(G, sets[a], sets[b], float(eta), colour):
            what = f"({float(eta)},{colour.code})" if colour else f"{float(eta)}"
            problems.append(f"K[{a},{b}] is not {what}-complete")
    return problems


def _spider_violations(G, W: SpiderWitness) -> list[str]:
    n, eta = G.n_scale, as_fraction(W.eta)
    S = {name: getattr(W, name) for name in SPIDER_SETS}
    main = {k: S[k] for k in ("A1", "A2", "B1", "B2", "C1", "C2")}
    problems = _disjoint(main)
    if problems:
        return problems
    for letter, cls in zip("ABC", W.classes):
        members = set(G.class_vertices(cls))
        for part in ("1", "2"):
            if not S[letter + part] <= members:
                problems.append(f"{letter}{part} not inside class {letter}")
        if len(S[letter + "1"] | S[letter + "2"]) < (1 - eta) * n:
            problems.append(f"|{letter}1 u {letter}2| too small")
    for split, parts in (("A2", ("A_B", "A_C")), ("B2", ("B_A", "B_C")), ("C2", ("C_A", "C_B", "C_C"))):
        union = frozenset().union(*(S[p] for p in parts))
        if union != S[split] or sum(len(S[p]) for p in parts) != len(S[split]):
            problems.append(f"{' u '.join(parts)} is not a partition of {split}")
        for p in parts:
            if 0 < len(S[p]) < 2 * eta * n:
                problems.append(f"{p} is negligible but not empty")
    if problems:
        return problems
    for d in "ABC":
        for e in "ABC":
            if d != e and not is_eta_complete(G, S[d + "1"], S[e + "2"], float(eta), W.c):
                problems.append(f"K[{d}1,{e}2] is not ({float(eta)},{W.c.code})-complete")
    if not _spider_core_connected(G, W):
        problems.append("the c-coloured spider graph is not connected")
    # condition 1
    if not len(W.A1) >= len(W.B1) >= len(W.C1 | W.C_C):
        problems.append("condition 1: need |A1| >= |B1| >= |C1 u C_C|")
    for x, y, other in (("A_B", "B_A", "C2"), ("A_C", "C_A", "B2"), ("B_C", "C_B", "A2")):
        if len(S[x]) != len(S[y]):
            problems.append(f"condition 1: |{x}| != |{y}|")
        if len(S[x]) > n - len(S[other]):
            problems.append(f"condition 1: |{x}| > n - |{other}|")
    if W.C_C and W.A_B:
        problems.append("condition 2: C_C and A_B both non-empty")
    limit = (1 - eta) * Fraction(3, 2) * n
    if W.A2 and len(W.A2 | W.B2 | W.C_A | W.C_B) > limit:
        problems.append("condition 3: A2 non-empty and |A2 u B2 u C_A u C_B| too large")
    if W.C1 and len(W.A1 | W.B1 | W.C1) >= limit and len(W.B1 | W.C1) > (1 - eta) * Fraction(3, 4) * n:
        problems.append("condition 4: C1 non-empty with |A1 u B1 u C1| and |B1 u C1| both large")
    return problems


def _spider_core_connected(G, W: SpiderWitness) -> bool:
    nbrs = G.nbr_bits(W.c)
    parts1 = {"A": bitset.from_iter(W.A1), "B": bitset.from_iter(W.B1), "C": bitset.from_iter(W.C1)}
    parts2 = {"A": bitset.from_iter(W.A2), "B": bitset.from_iter(W.B2), "C": bitset.from_iter(W.C2)}
    letter = {}
    for d in "ABC":
        for v in getattr(W, d + "1") | getattr(W, d + "2"):
            letter[v] = d
    side1 = W.side1
    allowed = {}
    for d in "ABC":
        others = [e for e in "ABC" if e != d]
        allowed[(d, 1)] = parts2[others[0]] | parts2[others[1]]
        allowed[(d, 2)] = parts1[others[0]] | parts1[others[1]]
    everything = W.side1 | W.side2
    if not everything:
        return False
    start = min(everything)
    seen = 1 << start
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            reach = nbrs[u] & allowed[(letter[u], 1 if u in side1 else 2)] & ~seen
            for w in bitset.iter_bits(reach):
                nxt.append(w)
            seen |= reach
        frontier = nxt
    return bitset.count(seen) == len(everything)


# -- certificates ------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    kind: str  # "odd" or "good"
    matching: Matching
    forks: ForkSystem | None = None
    thresholds: tuple = ()
    source: str = "exact"

    @property
    def colour(self) -> Colour:
        return self.matching.colour

    @property
    def achieved(self) -> tuple:
        if self.kind == "odd":
            return (self.matching.size,)
        return (self.matching.size, self.forks.size, self.forks.max_prongs)

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "colour": self.colour.code,
            "matching": self.matching.to_json(),
            "thresholds": list(self.thresholds),
            "achieved": list(self.achieved),
            "source": self.source,
        }
        if self.forks is not None:
            out["forks"] = self.forks.to_json()
            out["forks"]["center_side"] = sorted(self.forks.center_side)
            out["forks"]["prong_side"] = sorted(self.forks.prong_side)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Certificate":
        colour = Colour.parse(data["colour"])
        M = Matching(colour, tuple(tuple(e) for e in data["matching"]["edges"]))
        F = None
        if data.get("forks"):
            f = data["forks"]
            F = ForkSystem(
                colour,
                tuple((int(x["center"]), tuple(x["prongs"])) for x in f["forks"]),
                int(f["ratio"]),
                _fs(f.get("center_side", ())),
                _fs(f.get("prong_side", ())),
            )
        return cls(data["kind"], M, F, tuple(data.get("thresholds", ())), data.get("source", "exact"))


@dataclass(frozen=True)
class Inconclusive:
    best: dict
    reason: str = "no certificate reached its threshold"

    def to_json(self) -> dict:
        return {"kind": "inconclusive", "best": self.best, "reason": self.reason}


def validate_certificate(G: ColouredTripartiteGraph, cert: Certificate) -> list[str]:
    problems = [f"matching: {p}" for p in validate_matching(G, cert.matching)]
    M = cert.matching
    if cert.kind == "odd":
        if M.edges and not problems:
            comp = G.components(M.colour)[G.component_index(M.colour)[M.edges[0][0]]]
            if not comp.is_odd:
                problems.append("matching lies in an even component")
        if cert.thresholds and M.size < cert.thresholds[0]:
            problems.append(f"matching size {M.size} < {cert.thresholds[0]}")
    elif cert.kind == "good":
        F = cert.forks
        if F is None:
            return problems + ["good certificate without a fork system"]
        if F.colour != M.colour:
            problems.append("matching and fork system differ in colour")
        problems += [f"forks: {p}" for p in validate_fork_system(G, F)]
        if F.max_prongs > 3 or F.ratio > 3:
            problems.append("fork ratio exceeds 3")
        if cert.thresholds:
            m, f, r = cert.thresholds
            if M.size < m:
                problems.append(f"matching size {M.size} < {m}")
            if F.size < f:
                problems.append(f"fork system size {F.size} < {f}")
            if F.max_prongs > r:
                problems.append(f"fork ratio {F.max_prongs} > {r}")
    else:
        problems.append(f"unknown certificate kind {cert.kind!r}")
    return problems


# -- helpers for the handlers ----------------------------------------------------------


def _sorted(s) -> list[int]:
    return sorted(s)


def _max_bipartite(G, colour, X, Y) -> list[tuple[int, int]]:
    """Maximum matching of the given colour between disjoint sets X and Y."""
    X, Y = _sorted(X), _sorted(Y)
    if not X or not Y:
        return []
    sub = G.adjacency(colour)[np.ix_(X, Y)]
    match = maximum_bipartite_matching(csr_matrix(sub.astype(np.int8)), perm_type="column")
    return [(X[i], Y[j]) for i, j in enumerate(match) if j >= 0]


def _fill_forks(G, colour, forks: dict, prongs: Iterable[int], centres: Iterable[int], cap: int, used: set) -> int:
    """Attach each free prong to the lowest centre with spare capacity."""
    nbrs = G.nbr_bits(colour)
    open_mask = bitset.from_iter(c for c in centres if len(forks.get(c, ())) < cap)
    added = 0
    for p in prongs:
        if p in used:
            continue
        hit = nbrs[p] & open_mask
        if not hit:
            continue
        c = bitset.lowest(hit)
        forks.setdefault(c, []).append(p)
        used.add(p)
        added += 1
        if len(forks[c]) >= cap:
            open_mask &= ~(1 << c)
    return added


def _fork_system(colour, forks: dict, ratio, center_side, prong_side) -> ForkSystem:
    items = tuple(sorted((c, tuple(sorted(ps))) for c, ps in forks.items() if ps))
    return ForkSystem(colour, items, ratio, frozenset(center_side), frozenset(prong_side))


def _add_edges(forks: dict, edges, centre_first: bool):
    for u, v in edges:
        c, p = (u, v) if centre_first else (v, u)
        forks.setdefault(c, []).append(p)


def _finish(G, matching_edges, forks: dict, colour, ratio, center_side, prong_side, eta_prime, source) -> Certificate:
    m_thr, f_thr, _ = good_thresholds(eta_prime, G.n_scale)
    M = make_matching(G, colour, matching_edges)
    F = _fork_system(colour, forks, ratio, center_side, prong_side)
    if M.size < m_thr:
        raise ConstructionFailed(f"{source}: matching {M.size} < (1-eta')n = {m_thr}")
    if F.size < f_thr:
        raise ConstructionFailed(f"{source}: fork system {F.size} < (1-eta')3n/2 = {f_thr}")
    cert = Certificate("good", M, F, (m_thr, f_thr, 3), source)
    problems = validate_certificate(G, cert)
    if problems:
        raise ConstructionFailed(f"{source}: " + "; ".join(problems[:3]))
    return cert


def _check_handler_input(G, W, eta_prime, factor):
    ok, problems = validate_witness(G, W)
    if not ok:
        raise HypothesisViolated("invalid witness: " + "; ".join(problems[:5]))
    if as_fraction(W.eta) * factor > as_fraction(eta_prime):
        raise HypothesisViolated(f"need eta <= eta'/{factor}")


# -- pyramid handler ---------------------------------------------------------------


def pyramid_certificate(G: ColouredTripartiteGraph, W: PyramidWitness, eta_prime) -> Certificate:
    """Good pair from a pyramid witness (crossing, or tunnel with/without a big c'-matching)."""
    _check_handler_input(G, W, eta_prime, 3)
    if W.mode == "crossing":
        return _pyramid_crossing(G, W, eta_prime)
    Dp = W.D1p | W.D2p
    n = G.n_scale
    need = (1 - as_fraction(eta_prime)) * Fraction(1, 2) * n
    for D in (W.D1, W.D2):
        M = _max_bipartite(G, W.c2, D, Dp)
        if len(M) >= need:
            return _pyramid_tunnel_big(G, W, D, M, eta_prime)
    return _pyramid_tunnel_small(G, W, eta_prime)


def _pyramid_crossing(G, W: PyramidWitness, eta_prime) -> Certificate:
    n, eta = G.n_scale, as_fraction(W.eta)
    from .structures import greedy_monochromatic_matching

    M = greedy_monochromatic_matching(G, W.D1, W.D2, float(eta))
    D1, D2, D1p, D2p = W.D1, W.D2, W.D1p, W.D2p
    if M.colour not in (W.c, W.c2):
        # only possible when c == c'; then every pair into D1' u D2' has colour c
        return _pyramid_tunnel_small(G, W, eta_prime)
    if M.colour != W.c:
        # colour symmetry of crossings: c'-pyramids are (D1, D2') and (D2, D1')
        D1p, D2p = D2p, D1p
    if len(D1p) < (1 - eta) * n / 2:
        D1, D2, D1p, D2p = D2, D1, D2p, D1p
    colour = M.colour
    matched = {v for e in M.edges for v in e}
    M1 = greedy_bipartite_matching(G, colour, _sorted(D1), _sorted(D1p))
    M2 = greedy_bipartite_matching(G, colour, _sorted(D2 - matched), _sorted(D2p))
    forks: dict[int, list[int]] = {}
    # centres in D1 u D2', prongs in D2 u D1'
    _add_edges(forks, [(u, v) if u in D1 else (v, u) for u, v in M.edges], True)
    _add_edges(forks, M1, True)
    _add_edges(forks, M2, False)
    with_M = list(M.edges) + M2
    without = M1 + M2
    best = with_M if len(with_M) >= len(without) else without
    return _finish(G, best, forks, colour, 2, D1 | D2p, D2 | D1p, eta_prime, "pyramid crossing")


def _pyramid_tunnel_big(G, W: PyramidWitness, D, M, eta_prime) -> Certificate:
    other = W.D2 if D is W.D1 else W.D1
    Dp = W.D1p | W.D2p
    tunnel = greedy_bipartite_matching(G, W.c2, _sorted(D), _sorted(other))
    forks: dict[int, list[int]] = {}
    _add_edges(forks, tunnel, True)
    _add_edges(forks, M, True)
    return _finish(G, tunnel, forks, W.c2, 2, D, other | Dp, eta_prime, "pyramid tunnel with c'-matching")


def _pyramid_tunnel_small(G, W: PyramidWitness, eta_prime) -> Certificate:
    n, eta = G.n_scale, as_fraction(W.eta)
    Dp = W.D1p | W.D2p
    M1 = _max_bipartite(G, W.c, W.D1, Dp)
    M2 = _max_bipartite(G, W.c, W.D2, Dp)
    forks: dict[int, list[int]] = {}
    _add_edges(forks, M1, False)
    _add_edges(forks, M2, False)
    used = {u for u, _ in M1} | {u for u, _ in M2}
    if len(W.D1p) >= (1 - eta) * n / 2:
        top, centres = W.D1, W.D1p
    else:
        top, centres = W.D2, W.D2p
    _fill_forks(G, W.c, forks, _sorted(top), _sorted(centres), 3, used)
    matching = greedy_bipartite_matching(G, W.c, _sorted(W.D1p), _sorted(W.D1))
    matching += greedy_bipartite_matching(G, W.c, _sorted(W.D2p), _sorted(W.D2))
    return _finish(G, matching, forks, W.c, 3, Dp, W.D1 | W.D2, eta_prime, "pyramid tunnel without c'-matching")


# -- spider handler --------------------------------------------------------------------


def spider_certificate(G: ColouredTripartiteGraph, W: SpiderWitness, eta_prime) -> Certificate:
    """Good pair in colour c from a spider witness."""
    _check_handler_input(G, W, eta_prime, 5)
    n, eta = G.n_scale, as_fraction(W.eta)
    if len(W.A1 | W.B1 | W.C1) < (1 - eta) * Fraction(3, 2) * n:
        return _spider_small_core(G, W, eta_prime)
    if not W.C1:
        return _spider_two_forks(G, W, eta_prime)
    return _spider_cover_c1(G, W, eta_prime)


def _spider_small_core(G, W: SpiderWitness, eta_prime) -> Certificate:
    c = W.c
    # M1: B1 into A_C first, the rest of B1 into C2
    M1 = greedy_bipartite_matching(G, c, _sorted(W.A_C), _sorted(W.B1))
    M1 = [(b, a) for a, b in M1]
    used = {v for e in M1 for v in e}
    M1 += greedy_bipartite_matching(G, c, _sorted(W.B1 - used), _sorted(W.C2))
    used = {v for e in M1 for v in e}
    M2 = [(a, b) for b, a in greedy_bipartite_matching(G, c, _sorted(W.B_C), _sorted(W.A1))]
    forks: dict[int, list[int]] = {}
    _add_edges(forks, M1, True)
    _add_edges(forks, M2, True)
    M3 = greedy_bipartite_matching(G, c, _sorted(W.C_A - used), _sorted(W.B1))
    M4 = greedy_bipartite_matching(G, c, _sorted(W.C_B - used), _sorted(W.A1))
    M5 = greedy_bipartite_matching(G, c, _sorted(W.C_C - used), _sorted(W.A1))
    for extra in (M3, M4, M5):
        _add_edges(forks, extra, False)
    return _finish(G, M1 + M2, forks, c, 3, W.side1, W.side2, eta_prime, "spider small core")


def _spider_two_forks(G, W: SpiderWitness, eta_prime) -> Certificate:
    c = W.c
    MA = greedy_bipartite_matching(G, c, _sorted(W.A1), _sorted(W.C2))
    covered = {v for _, v in MA}
    MBp = greedy_bipartite_matching(G, c, _sorted(W.B1), _sorted(W.C2 - covered))
    in_MBp = {v for e in MBp for v in e}
    MB = MBp + greedy_bipartite_matching(G, c, _sorted(W.B1 - in_MBp), _sorted(W.C2 - in_MBp))
    forks: dict[int, list[int]] = {}
    _add_edges(forks, MA, False)
    _add_edges(forks, MB, False)
    return _finish(G, MA + MBp, forks, c, 2, W.side2, W.side1, eta_prime, "spider with empty C1")


def _spider_cover_c1(G, W: SpiderWitness, eta_prime) -> Certificate:
    c = W.c
    M1 = greedy_bipartite_matching(G, c, _sorted(W.C1), _sorted(W.B2))
    M2 = greedy_bipartite_matching(G, c, _sorted(W.C2), _sorted(W.A1 | W.B1))
    if len(M1) < len(W.C1):
        raise ConstructionFailed(f"spider covering C1: matching misses {len(W.C1) - len(M1)} vertices of C1")
    forks: dict[int, list[int]] = {}
    # 1-forks of M1 are oriented with the centre in B2 so that all centres lie on one side
    _add_edges(forks, M1, False)
    _add_edges(forks, M2, True)
    used = {v for e in M1 + M2 for v in e}
    # F': up to two further prongs per C2 centre
    _fill_forks(G, c, forks, _sorted((W.A1 | W.B1) - used), _sorted(W.C2), 3, used)
    return _finish(G, M1 + M2, forks, c, 3, W.side2, W.side1, eta_prime, "spider covering C1")


def extremal_certificate(G: ColouredTripartiteGraph, W: ExtremalWitness, eta_prime) -> Certificate:
    if isinstance(W, PyramidWitness):
        return pyramid_certificate(G, W, eta_prime)
    return spider_certificate(G, W, eta_prime)


# -- improving construction ---------------------------------------------------------------


def improve_matching(G: ColouredTripartiteGraph, M: Matching, eta_prime, eta=None) -> Matching:
    """Connected matching in the other colour with at least ``|M| + eta' n / 4`` edges.

    Uncovered vertices are grouped per class (R_A >= R_B >= R_C after
    relabelling). Every block of M is re-matched in the other colour into the
    remainder of the class it avoids, and a final greedy matching is taken
    between what is left of R_A and R_B plus the freed block endpoints.
    """
    n = G.n_scale
    etap = as_fraction(eta_prime)
    check_class = eta is not None
    eta = as_fraction(eta) if eta is not None else etap / 500
    if M.colour is None:
        raise PreconditionError("matching needs a colour")
    problems = validate_matching(G, M)
    if problems:
        raise PreconditionError("input matching invalid: " + problems[0])
    if not etap * n < M.size < (1 - etap) * n:
        raise HypothesisViolated(f"need eta'n < |M| < (1-eta')n, got |M|={M.size}")
    if check_class and not in_class_K_eta(G, float(eta)):
        raise HypothesisViolated(f"graph is not in K_eta for eta={float(eta)}")
    green, red = M.colour, M.colour.other()
    cls = G.class_of
    covered = M.vertices
    R = [sorted(v for v in G.class_vertices(i) if v not in covered) for i in range(3)]
    roleA, roleB, roleC = sorted(range(3), key=lambda i: (-len(R[i]), i))

    def block(i, j):
        return [e for e in M.edges if {int(cls[e[0]]), int(cls[e[1]])} == {i, j}]

    gbits, rbits = G.nbr_bits(green), G.nbr_bits(red)
    RA_mask = bitset.from_iter(R[roleA])
    M_BC = block(roleB, roleC)
    block_verts = bitset.from_iter(v for e in M_BC for v in e)
    u_star = next((u for u in R[roleA] if bitset.count(gbits[u] & block_verts) > 4 * eta * n), R[roleA][0] if R[roleA] else None)

    new_edges: list[tuple[int, int]] = []
    used = 0 if u_star is None else 1 << u_star
    freed: list[int] = []
    for blk, target in ((M_BC, roleA), (block(roleA, roleC), roleB), (block(roleA, roleB), roleC)):
        tmask = bitset.from_iter(R[target])
        for u, v in blk:
            gu, gv = bitset.count(gbits[u] & tmask), bitset.count(gbits[v] & tmask)
            first, second = (u, v) if gu <= gv else (v, u)
            hit = rbits[first] & tmask & ~used
            if hit:
                w = bitset.lowest(hit)
                used |= (1 << w) | (1 << first)
                new_edges.append((first, w))
                if blk is M_BC:
                    freed.append(second)
            elif blk is M_BC:
                freed.extend((u, v))
    left = [u for u in R[roleA] if not used >> u & 1]
    right = [v for v in R[roleB] if not used >> v & 1] + freed
    new_edges += greedy_bipartite_matching(G, red, left, right, exclude=used)
    out = make_matching(G, red, new_edges)
    target = M.size + etap * n / 4
    if out.size < target:
        raise ConstructionFailed(f"improved matching has {out.size} < |M| + eta'n/4 = {float(target):.2f} edges")
    if out.component_id is None:
        raise ConstructionFailed("improved matching is not connected in the other colour")
    return out


# -- certification -----------------------------------------------------------------------


def certify_good_or_odd(G: ColouredTripartiteGraph, eta_prime, witness: ExtremalWitness | None = None):
    """OddMatching / GoodPair by exact search, else the witness handler, else Inconclusive."""
    n = G.n_scale
    odd_thr = odd_threshold(eta_prime, n)
    m_thr, f_thr, ratio = good_thresholds(eta_prime, n)
    best: dict = {}
    odd_best = None
    for colour in (Colour.GREEN, Colour.RED):
        try:
            M = max_connected_matching(G, colour, require_odd=True)
        except NotFound:
            continue
        if odd_best is None or M.size > odd_best.size:
            odd_best = M
    best["odd_matching"] = odd_best.size if odd_best else 0
    if odd_best is not None and odd_best.size >= odd_thr:
        return Certificate("odd", odd_best, None, (odd_thr,), "exact")
    for colour in (Colour.GREEN, Colour.RED):
        try:
            M = max_connected_matching(G, colour)
        except NotFound:
            continue
        F = None
        for comp in G.components(colour):
            if comp.is_odd or len(comp.vertices) < 2:
                continue
            cand = max_fork_system(G, colour, comp, ratio)
            if F is None or cand.size > F.size:
                F = cand
        best[f"{colour.code}_matching"] = M.size
        best[f"{colour.code}_forks"] = F.size if F else 0
        if M.size >= m_thr and F is not None and F.size >= f_thr:
            return Certificate("good", M, F, (m_thr, f_thr, ratio), "exact")
    if witness is not None:
        try:
            return extremal_certificate(G, witness, eta_prime)
        except (ConstructionFailed, HypothesisViolated) as exc:
            return Inconclusive(best, f"witness handler failed: {exc}")
    return Inconclusive(best)
