from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tripartite_trees.assignment import (
    WeightTable,
    adjacency_lists,
    assign_to_forks,
    assign_to_matching,
    build_valid_assignment,
    check_valid,
    fork_bounds,
    group_rows,
    matching_bound,
    parity_oracle,
    repair_homomorphism,
    walk_parity,
)
from tripartite_trees.errors import AssignmentFailure, HypothesisViolated, PreconditionError, WalkConditionViolated
from tripartite_trees.extremal import Certificate, certify_good_or_odd
from tripartite_trees.graph_core import Colour, build_graph
from tripartite_trees.structures import ForkSystem, Matching
from tripartite_trees.tree_tools import Tree, decompose, path_tree, random_tree, s_cut


def shrub_loads(W, phi):
    load: dict[int, int] = {}
    for i, (a1, a2) in enumerate(W.rows):
        load[phi[(i, 1)]] = load.get(phi[(i, 1)], 0) + a1
        load[phi[(i, 2)]] = load.get(phi[(i, 2)], 0) + a2
    return load


class TestWeightTable:
    def test_row_above_s(self):
        with pytest.raises(PreconditionError):
            WeightTable(((2, 2),), 3)

    def test_totals(self):
        W = WeightTable.from_rows([(1, 2), (3, 0)])
        assert (W.t1, W.t2, W.t, W.S) == (4, 2, 6, 3)


class TestMatchingAssignment:
    def test_single_row(self):
        W = WeightTable.from_rows([(2, 3)])
        phi = assign_to_matching(W, [(0, 1)])
        assert sorted(shrub_loads(W, phi).values()) == [2, 3]

    def test_ten_unit_rows_two_edges(self):
        W = WeightTable.from_rows([(1, 1)] * 10, S=2)
        phi = assign_to_matching(W, [(0, 1), (2, 3)])
        assert max(shrub_loads(W, phi).values()) <= 10 / 4 + 2 * 2

    def test_empty_matching(self):
        with pytest.raises(PreconditionError):
            assign_to_matching(WeightTable.from_rows([(1, 0)]), [])

    @given(st.integers(0, 10**6))
    def test_bound_under_random_stress(self, seed):
        rng = np.random.default_rng(seed)
        S = int(rng.integers(1, 30))
        rows = []
        for _ in range(int(rng.integers(1, 80))):
            a = int(rng.integers(0, S + 1))
            rows.append((a, S - a) if rng.random() < 0.5 else (a, int(rng.integers(0, S - a + 1))))
        W = WeightTable.from_rows(rows, S)
        m = int(rng.integers(1, 8))
        edges = [(2 * i, 2 * i + 1) for i in range(m)]
        phi = assign_to_matching(W, edges)
        for i in range(len(rows)):
            assert tuple(sorted((phi[(i, 1)], phi[(i, 2)]))) in edges
        assert max(shrub_loads(W, phi).values()) <= matching_bound(W, m)


def forks(num, ratio):
    out, v = [], 0
    for _ in range(num):
        out.append((v, tuple(range(v + 1, v + 1 + ratio))))
        v += ratio + 1
    return ForkSystem(Colour.GREEN, tuple(out), ratio)


class TestForkAssignment:
    def test_single_fork_single_row(self):
        F = ForkSystem(Colour.GREEN, ((0, (1,)),), 1)
        fa = assign_to_forks(WeightTable.from_rows([(2, 1)]), F, seed=0)
        assert fa.phi == {(0, 1): 1, (0, 2): 0}

    def test_ten_forks_sixty_rows(self):
        F = forks(10, 3)
        rng = np.random.default_rng(4)
        accepted = 0
        for seed in range(50):
            rows = [(1, 0) if rng.random() < 0.5 else (1, 1) for _ in range(60)]
            W = WeightTable.from_rows(rows, 2)
            fa = assign_to_forks(W, F, retries=3, seed=seed)
            b1, b2 = fork_bounds(W, F)
            assert max(fa.prong_load.values()) <= b1 and max(fa.centre_load.values()) <= b2
            accepted += fa.attempts == 1
        assert accepted > 25

    def test_missing_centres(self):
        empty = ForkSystem(Colour.GREEN, (), 3)
        with pytest.raises(PreconditionError):
            assign_to_forks(WeightTable.from_rows([(1, 1)]), empty)

    def test_s_larger_than_t(self):
        with pytest.raises(PreconditionError):
            assign_to_forks(WeightTable.from_rows([(1, 0)], S=5), forks(1, 1))

    def test_failure_after_budget(self):
        F = forks(1, 1)
        W = WeightTable.from_rows([(1, 0)] * 3, S=1)
        assert assign_to_forks(W, F, seed=0).attempts == 1
        with pytest.raises(AssignmentFailure):
            assign_to_forks(W, F, retries=0)

    @given(st.integers(0, 10**6))
    def test_grouping(self, seed):
        rng = np.random.default_rng(seed)
        S = int(rng.integers(2, 20))
        rows = [(int(rng.integers(0, S // 2 + 1)), 0) for _ in range(int(rng.integers(1, 40)))]
        W = WeightTable.from_rows(rows, S)
        groups = group_rows(W)
        assert sorted(i for g in groups for i in g) == list(range(len(rows)))
        heavy = [2 * sum(rows[i][0] for i in g) >= S for g in groups]
        assert all(heavy[:-1])


class TestWalkParity:
    def test_single_edge(self):
        adj = [[1], [0]]
        wp = walk_parity(adj, 0, 0)
        assert wp.even_walk == [0, 1, 0] and wp.odd_walk is None

    def test_triangle(self):
        adj = [[1, 2], [0, 2], [0, 1]]
        for u in range(3):
            for v in range(3):
                wp = walk_parity(adj, u, v)
                assert wp.even_walk is not None and wp.odd_walk is not None
                assert len(wp.even_walk) - 1 <= 6 and len(wp.odd_walk) - 1 <= 6

    def test_disconnected(self):
        adj = [[1], [0], [3], [2]]
        wp = walk_parity(adj, 0, 2)
        assert wp.even_walk is None and wp.odd_walk is None

    @given(st.integers(0, 10**6))
    def test_walks_are_valid_and_agree_with_oracle(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 9))
        A = np.triu(rng.random((k, k)) < 0.35, 1)
        A = A | A.T
        adj = [np.flatnonzero(A[i]).tolist() for i in range(k)]
        has_walk = parity_oracle(adj)
        for u in range(k):
            for v in range(k):
                wp = walk_parity(adj, u, v)
                for parity, walk in ((0, wp.even_walk), (1, wp.odd_walk)):
                    if walk is None:
                        continue
                    assert walk[0] == u and walk[-1] == v
                    assert (len(walk) - 1) % 2 == parity and len(walk) - 1 <= 2 * k
                    assert all(b in adj[a] for a, b in zip(walk, walk[1:]))
                    assert has_walk(u, v, parity)
                if u != v or adj[u]:
                    assert (wp.even_walk is not None) == has_walk(u, v, 0)
                    assert (wp.odd_walk is not None) == has_walk(u, v, 1)


class TestRepair:
    def test_empty_cut_is_identity(self):
        T = path_tree(4)
        D = decompose(T, set(), 4)
        psi = {0: 0, 1: 1, 2: 0, 3: 1}
        assert repair_homomorphism(T, D, psi, [[1], [0]]) == [0, 1, 0, 1]

    def test_path_seven_into_triangle(self):
        T = path_tree(7)
        D = decompose(T, {3}, 3)
        adj = [[1, 2], [0, 2], [0, 1]]
        # both shrubs put on edge 0-1 with the same orientation: needs an odd walk
        psi = {0: 0, 1: 1, 2: 0, 4: 0, 5: 1, 6: 0, 3: 2}
        h = repair_homomorphism(T, D, psi, adj, Delta=2)
        assert not check_valid(T.edges(), h, adj, 0.0, 100)
        changed = sum(1 for v in range(7) if v != 3 and h[v] != psi[v])
        assert changed <= 3 * 1 * 2 ** 7
        # exhaustive: every homomorphism of P_7 into a triangle has a 2-image neighbourhood, so validity is all we need
        assert all(h[a] != h[b] for a, b in T.edges())

    def test_parity_violation(self):
        T = path_tree(7)
        D = decompose(T, {3}, 3)
        adj = [[1], [0]]  # bipartite reduced graph
        psi = {0: 0, 1: 1, 2: 0, 4: 1, 5: 0, 6: 1, 3: 1}
        with pytest.raises(WalkConditionViolated) as info:
            repair_homomorphism(T, D, psi, adj)
        assert set(info.value.pair) == {2, 4}

    @given(st.integers(0, 10**6))
    def test_random_instances(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(2, 7))
        Delta = int(rng.integers(2, 5))
        while True:
            A = np.triu(rng.random((k, k)) < 0.5, 1)
            A = A | A.T
            adj = [np.flatnonzero(A[i]).tolist() for i in range(k)]
            if all(adj) and _connected(adj):
                break
        side = _sides(adj)
        T = random_tree(int(rng.integers(5, 150)), Delta, int(rng.integers(1 << 30)))
        D = s_cut(T, int(rng.integers(1, max(2, T.t // 3))))
        edges = [(a, b) for a in range(k) for b in adj[a]]
        psi = {}
        for sh in D.shrubs:
            a, b = edges[int(rng.integers(len(edges)))]
            if side is not None and side[a] != 0:
                a, b = b, a
            for v in sh.vertices:
                psi[v] = a if T.colour_class[v] == 1 else b
        for x in D.cut:
            psi[x] = int(rng.integers(k))
        h = repair_homomorphism(T, D, psi, adj, Delta)
        assert not check_valid(T.edges(), h, adj, 0.0, 1e9)
        changed = sum(1 for v in range(T.t) if v not in D.cut and h[v] != psi[v])
        assert changed <= 3 * len(D.cut) * Delta ** (2 * k + 1)


def _connected(adj):
    seen, stack = {0}, [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(adj)


def _sides(adj):
    side, stack = {0: 0}, [0]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in side:
                side[w] = 1 - side[u]
                stack.append(w)
            elif side[w] == side[u]:
                return None
    return side


def complete_green(sizes):
    total = sum(sizes)
    cls = np.repeat(np.arange(3), sizes)
    return build_graph(sizes, [(u, v, "G") for u in range(total) for v in range(u + 1, total) if cls[u] != cls[v]])


def broom_tree(spine: int) -> Tree:
    """Each spine vertex has four leaves and one connector to the next: t2 = t/6."""
    edges, nxt, prev_conn = [], 0, None
    for _ in range(spine):
        s = nxt
        nxt += 1
        if prev_conn is not None:
            edges.append((prev_conn, s))
        for _ in range(4):
            edges.append((s, nxt))
            nxt += 1
        edges.append((s, nxt))
        prev_conn = nxt
        nxt += 1
    return Tree(nxt, edges)


class TestValidAssignment:
    def test_odd_matching_case(self):
        R = complete_green((2, 2, 2))
        cert = certify_good_or_odd(R, 0.1)
        assert cert.kind == "odd"
        n_over_k = 1000
        T = random_tree(int(0.8 * 0.5 * 2 * cert.matching.size * n_over_k), 6, seed=2)
        D, A = build_valid_assignment(T, R, cert, 0.5, 0.01, n_over_k, cut_eps=0.049, seed=0)
        assert A.case == "matching"
        adj = adjacency_lists(R, Colour.GREEN)
        assert not check_valid(T.edges(), A.h, adj, 0.25, 0.99 * n_over_k)
        assert max(A.loads) < (1 - 0.25) * 0.99 * n_over_k
        assert all(c["holds"] for c in A.checks)

    def test_fork_case_for_unbalanced_tree(self):
        # green K between A u B and C is bipartite; red A-B is bipartite too
        sizes = (2, 2, 2)
        cls = np.repeat(np.arange(3), sizes)
        edges = [(u, v, "G" if 2 in (cls[u], cls[v]) else "R") for u in range(6) for v in range(u + 1, 6) if cls[u] != cls[v]]
        R = build_graph(sizes, edges)
        cert = certify_good_or_odd(R, 0.1)
        assert isinstance(cert, Certificate) and cert.kind == "good"
        T = broom_tree(300)
        assert 3 * T.t2 <= T.t
        D, A = build_valid_assignment(T, R, cert, 0.5, 0.01, 1000, cut_eps=0.049, seed=1)
        assert A.case == "forks"
        assert not check_valid(T.edges(), A.h, adjacency_lists(R, cert.colour), 0.25, 990)

    def test_tree_too_large(self):
        R = complete_green((2, 2, 2))
        cert = certify_good_or_odd(R, 0.1)
        T = path_tree(int(0.5 * 2 * 3 * 100) + 1)
        with pytest.raises(HypothesisViolated):
            build_valid_assignment(T, R, cert, 0.5, 0.01, 100)

    def test_eps_hypothesis(self):
        R = complete_green((2, 2, 2))
        cert = certify_good_or_odd(R, 0.1)
        with pytest.raises(HypothesisViolated):
            build_valid_assignment(path_tree(10), R, cert, 0.5, 0.06, 100)

    def test_checker_is_independent(self):
        adj = [[1], [0]]
        assert check_valid([(0, 1)], [0, 0], adj, 0.0, 10)
        assert check_valid([(0, 1)], [0, 1], adj, 0.5, 2)  # load 1 is not < 1
        assert not check_valid([(0, 1)], [0, 1], adj, 0.5, 3)
