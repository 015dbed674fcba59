from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tripartite_trees.errors import BadArguments, TooFewVertices, TooLarge
from tripartite_trees.extremal import validate_witness
from tripartite_trees.graph_core import Colour, build_graph
from tripartite_trees.instances import (
    SPIDER_PROFILES,
    gen_odd_template,
    gen_planted_host,
    gen_pyramid,
    gen_random_colouring,
    gen_sparse_host,
    gen_spider,
    oracle_max_connected_matching,
    oracle_max_fork_system,
    oracle_tree_embedding,
)
from tripartite_trees.structures import max_connected_matching
from tripartite_trees.tree_tools import Tree, path_tree, star_tree


class TestRandomColouring:
    def test_extremes(self):
        assert gen_random_colouring(5, 1.0, seed=0).num_edges(Colour.RED) == 0
        assert gen_random_colouring(5, 0.0, seed=0).num_edges(Colour.GREEN) == 0

    def test_half_green_count(self):
        counts = [gen_random_colouring(12, 0.5, seed=s).num_edges(Colour.GREEN) for s in range(20)]
        # 432 edges, binomial sd about 10.4
        assert all(abs(c - 216) < 50 for c in counts)
        assert abs(np.mean(counts) - 216) < 15

    def test_deterministic(self):
        a, b = gen_random_colouring(20, seed=9), gen_random_colouring(20, seed=9)
        assert a.matrix.tobytes() == b.matrix.tobytes()


class TestSparseHost:
    def test_full_density_is_complete(self):
        G = gen_sparse_host(6, 1.0, seed=0)
        assert G.num_edges() == 3 * 36

    def test_bad_p(self):
        with pytest.raises(BadArguments):
            gen_sparse_host(5, 0.0)

    def test_edge_count(self):
        for seed in range(5):
            G = gen_sparse_host(200, 0.3, seed=seed)
            assert G.num_edges() <= 4 * 0.3 * 200**2


class TestPlanted:
    def test_minimum_size(self):
        with pytest.raises(TooFewVertices):
            gen_pyramid(59, 0.01)
        with pytest.raises(BadArguments):
            gen_pyramid(60, 0.3)
        with pytest.raises(BadArguments):
            gen_pyramid(60, 0.01, "tunnel", Colour.GREEN, Colour.GREEN)

    @given(st.integers(0, 10**6), st.sampled_from(["tunnel", "crossing"]))
    def test_pyramid_witness_valid(self, seed, mode):
        G, W = gen_pyramid(60, 0.01, mode, seed=seed)
        assert validate_witness(G, W)[0]

    @given(st.integers(0, 10**6), st.sampled_from(sorted(SPIDER_PROFILES)))
    def test_spider_witness_valid(self, seed, profile):
        G, W = gen_spider(60, 0.01, profile, seed=seed)
        assert validate_witness(G, W)[0]

    def test_byte_identical(self):
        a, _ = gen_spider(90, 0.02, "small_core", seed=4)
        b, _ = gen_spider(90, 0.02, "small_core", seed=4)
        assert a.matrix.tobytes() == b.matrix.tobytes()

    def test_odd_template(self):
        T = gen_odd_template(6, seed=1)
        sizes = []
        for colour in ("G", "R"):
            if any(c.is_odd for c in T.components(colour)):
                sizes.append(max_connected_matching(T, colour, True).size)
        assert max(sizes) == 3

    def test_planted_host_blocks(self):
        template = build_graph((1, 1, 1), [(0, 1, "G"), (1, 2, "R")])
        host, part = gen_planted_host(template, 10, seed=0)
        c = part.clusters
        assert (host.matrix[np.ix_(c[0], c[1])] == 1).all()
        assert (host.matrix[np.ix_(c[1], c[2])] == 2).all()
        assert (host.matrix[np.ix_(c[0], c[2])] > 0).all()
        assert not part.problems(host)


class TestOracles:
    def test_triangle_and_six_cycle(self):
        tri = build_graph((1, 1, 1), [(0, 1, "G"), (1, 2, "G"), (0, 2, "G")])
        assert oracle_max_connected_matching(tri, "G") == 1
        cyc = [0, 2, 4, 1, 3, 5]  # classes alternate 0,1,2,0,1,2
        c6 = build_graph((2, 2, 2), [(cyc[i], cyc[(i + 1) % 6], "G") for i in range(6)])
        assert oracle_max_connected_matching(c6, "G") == 3
        assert oracle_max_connected_matching(c6, "G", require_odd=True) == 0

    def test_size_limits(self):
        G = gen_random_colouring(5, seed=0)
        with pytest.raises(TooLarge):
            oracle_max_connected_matching(G, "G")
        with pytest.raises(TooLarge):
            oracle_tree_embedding(path_tree(13), gen_random_colouring(2, seed=0), "G")

    def test_fork_oracle_star(self):
        G = build_graph((1, 4, 0), [(0, b, "G") for b in range(1, 5)])
        assert oracle_max_fork_system(G, "G", range(5), 3) == 3

    def test_tree_embedding(self):
        tri = build_graph((1, 1, 1), [(0, 1, "G"), (1, 2, "G"), (0, 2, "G")])
        assert oracle_tree_embedding(path_tree(3), tri, "G")
        G = gen_random_colouring(3, 1.0, seed=0)
        # remove green edges at vertex 0 until its green degree is 3; other vertices have degree 6
        mat = G.matrix.copy()
        for v in (3, 4, 5):
            mat[0, v] = mat[v, 0] = 2
        G = type(G)((3, 3, 3), mat)
        assert oracle_tree_embedding(star_tree(4), G, "G")  # other vertices still have degree 6
        low = build_graph((1, 3, 3), [(0, b, "G") for b in range(1, 4)] + [(1, 4, "R")])
        assert not oracle_tree_embedding(star_tree(4), low, "G")
        assert oracle_tree_embedding(Tree(2, [(0, 1)]), low, "R")
