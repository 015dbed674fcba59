from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tripartite_trees.embedder import Embedding, dump_state, embed, feasibility, typical_vertices, verify_embedding
from tripartite_trees.errors import HypothesisViolated, NoTypicalVertex, TargetTooSmall
from tripartite_trees.graph_core import Colour, ColouredTripartiteGraph, build_graph
from tripartite_trees.instances import gen_planted_host
from tripartite_trees.tree_tools import Tree, path_tree, random_tree, s_cut

PAIR = build_graph((1, 1, 0), [(0, 1, "G")])


def alternating(T: Tree) -> list[int]:
    return [c - 1 for c in T.colour_class]


class TestTypical:
    def test_complete_pair(self):
        host, part = gen_planted_host(PAIR, 50, seed=0)
        pool, X = part.clusters[0], part.clusters[1][:10]
        assert typical_vertices(host, "G", pool, X, 0.9, 0.05, L=50) == pool.tolist()

    def test_isolated_vertex_excluded(self):
        host, part = gen_planted_host(PAIR, 20, seed=0)
        mat = host.matrix.copy()
        v = int(part.clusters[0][0])
        mat[v, part.clusters[1]] = 2
        mat[part.clusters[1], v] = 2
        host = ColouredTripartiteGraph(host.class_sizes, mat)
        assert v not in typical_vertices(host, "G", part.clusters[0], part.clusters[1], 0.5, 0.1)

    def test_dense_random_pair(self):
        host, part = gen_planted_host(PAIR, 500, p=0.9, seed=1)
        X = part.clusters[1][:100]
        typ = typical_vertices(host, "G", part.clusters[0], X, 0.8, 0.05, L=500)
        assert len(typ) >= 0.95 * 500

    def test_target_too_small(self):
        host, part = gen_planted_host(PAIR, 100, seed=0)
        with pytest.raises(TargetTooSmall):
            typical_vertices(host, "G", part.clusters[0], part.clusters[1][:4], 0.5, 0.05, L=100)


class TestEmbed:
    def test_path_of_240_in_one_pair(self):
        host, part = gen_planted_host(PAIR, 200, seed=0)
        T = path_tree(240)
        D = s_cut(T, 30)  # |C| <= 8 leaves the connecting spaces comfortably large
        h = alternating(T)
        E = embed(T, D, h, host, part, "G", d=0.5, eps=0.01, rho=0.25, instrument=True, seed=0)
        assert not verify_embedding(T, E, host, part, h)
        # cut vertices sit in the connecting spaces, which hold at most |C| used vertices per cluster
        for i, cl in enumerate(part.clusters):
            connect = set(sorted(cl.tolist())[200 - 25 :])
            in_connect = [x for x in range(T.t) if E.f[x] in connect]
            assert set(in_connect) <= D.cut and len(in_connect) <= len(D.cut)
        assert E.stats["min_candidate_slack"] > 0
        assert not E.stats["feasibility"]["holds"]  # the space inequality is far from true at this scale

    def test_single_vertex(self):
        host, part = gen_planted_host(PAIR, 40, seed=0)
        T = Tree(1, [])
        E = embed(T, s_cut(T, 1), [0], host, part, "G", 0.5, 0.01, 0.25)
        assert E.f[0] in set(part.clusters[0].tolist())

    def test_overloaded_cluster_rejected(self):
        host, part = gen_planted_host(PAIR, 40, seed=0)
        T = path_tree(60)
        with pytest.raises(HypothesisViolated):
            embed(T, s_cut(T, 5), alternating(T), host, part, "G", 0.5, 0.01, 0.25)

    def test_irregular_pair_rejected_by_audit(self):
        host, part = gen_planted_host(build_graph((1, 1, 0), [(0, 1, "R")]), 60, seed=0)
        T = path_tree(20)
        with pytest.raises(HypothesisViolated):
            embed(T, s_cut(T, 5), alternating(T), host, part, "G", 0.5, 0.01, 0.25)

    def test_no_typical_vertex_dumps_state(self):
        host, part = gen_planted_host(build_graph((1, 1, 0), [(0, 1, "R")]), 60, seed=0)
        T = path_tree(20)
        with pytest.raises(NoTypicalVertex) as info:
            embed(T, s_cut(T, 5), alternating(T), host, part, "G", 0.5, 0.01, 0.25, audit_samples=0)
        state = json.loads(dump_state(info.value))
        assert state["case"] in (1, 2, 3) and "candidates" in state and "reservoirs" in state

    def test_enforced_inequality(self):
        host, part = gen_planted_host(PAIR, 100, seed=0)
        T = path_tree(30)
        with pytest.raises(HypothesisViolated):
            embed(T, s_cut(T, 5), alternating(T), host, part, "G", 0.5, 0.01, 0.25, enforce_inequality=True)

    @settings(max_examples=25)
    @given(st.integers(0, 10**6), st.integers(2, 8))
    def test_random_trees_in_planted_triangle(self, seed, delta):
        # every cross pair green; h alternates between clusters 0 and 1
        tri = build_graph((1, 1, 1), [(0, 1, "G"), (1, 2, "G"), (0, 2, "G")])
        host, part = gen_planted_host(tri, 120, p=1.0, seed=seed)
        rng = np.random.default_rng(seed)
        T = random_tree(int(rng.integers(2, 170)), delta, seed)  # loads stay below the cap of 89
        D = s_cut(T, 20)  # |C| <= 10 fits the connecting spaces of 15 vertices
        h = alternating(T)
        E = embed(T, D, h, host, part, "G", 0.5, 0.01, 0.25, audit_samples=20, seed=seed)
        assert not verify_embedding(T, E, host, part, h)


class TestVerify:
    def setup_method(self):
        self.host = build_graph((2, 2, 0), [(0, 2, "G"), (1, 3, "R"), (0, 3, "G")])
        self.T = path_tree(2)

    def test_valid(self):
        assert verify_embedding(self.T, Embedding([0, 2], Colour.GREEN), self.host) == []

    def test_not_injective(self):
        assert "not injective" in verify_embedding(self.T, Embedding([0, 0], Colour.GREEN), self.host)

    def test_wrong_colour(self):
        problems = verify_embedding(self.T, Embedding([1, 3], Colour.GREEN), self.host)
        assert any("wrong colour" in p for p in problems)

    def test_non_edge(self):
        problems = verify_embedding(self.T, Embedding([1, 2], Colour.GREEN), self.host)
        assert any("non-edge" in p for p in problems)

    def test_json_round_trip(self):
        E = Embedding([0, 2], Colour.GREEN)
        assert Embedding.from_json(E.to_json()).f == [0, 2]


def test_feasibility_sides():
    f = feasibility(0.5, 0.25, 0.01, 1000, 40, 49, 8)
    assert f["lhs"] == pytest.approx(-87.5) and f["rhs"] == 97 and not f["holds"]
