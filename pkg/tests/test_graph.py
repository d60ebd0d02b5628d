import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mlcut.graph import (GraphFormatError, WeightedGraph, apply_flip, cut_value,
                         gain_vector, karloff_generate, karloff_size, load_graph,
                         load_gset, load_matrix_market, random_weighted_graph,
                         save_gset)

from conftest import naive_cut, random_graph


@st.composite
def graphs_and_sides(draw, max_n=12):
    n = draw(st.integers(2, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    weights = draw(st.lists(st.floats(-10, 10, allow_nan=False), min_size=len(chosen),
                            max_size=len(chosen)))
    x = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    g = WeightedGraph(n, [a for a, _ in chosen], [b for _, b in chosen], weights)
    return g, np.array(x, dtype=np.int8)


class TestConstruction:
    def test_dedupe_sums_and_orders(self):
        g = WeightedGraph(3, [2, 0, 1], [0, 2, 2], [1.0, 2.0, 4.0])
        assert g.m == 2
        assert list(g.edges()) == [(0, 2, 3.0), (1, 2, 4.0)]

    def test_self_loops_dropped(self):
        g = WeightedGraph(2, [0, 1], [0, 0], [5.0, 1.0])
        assert g.m == 1 and g.n_self_loops == 1

    def test_adjacency_index_matches_edges(self, rng):
        g = random_graph(rng, 15)
        for i in range(g.n):
            nbr, w = g.neighbors(i)
            for j, wij in zip(nbr, w):
                assert g.dense()[i, j] == wij

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            WeightedGraph(2, [0], [2])
        with pytest.raises(ValueError):
            WeightedGraph(2, [0], [1], volumes=[1, 0])
        with pytest.raises(ValueError):
            WeightedGraph(2, [0, 1], [1])

    def test_frozen_arrays(self, triangle):
        with pytest.raises(ValueError):
            triangle.w[0] = 7.0

    def test_relabel_preserves_cut(self, rng):
        g = random_graph(rng, 10)
        perm = rng.permutation(10)
        h = g.relabel(perm)
        x = rng.integers(0, 2, 10)
        y = np.empty_like(x)
        y[perm] = x
        assert cut_value(h, y) == pytest.approx(cut_value(g, x))


class TestCut:
    def test_triangle(self, triangle):
        assert cut_value(triangle, [0, 1, 1]) == 2

    def test_single_edge(self):
        g = WeightedGraph.from_edges(2, [(0, 1, 3.0)])
        assert cut_value(g, [0, 1]) == 3

    def test_matches_naive(self, rng):
        g = random_graph(rng, 10, signed=True)
        for _ in range(20):
            x = rng.integers(0, 2, 10)
            assert cut_value(g, x) == pytest.approx(naive_cut(g, x), abs=1e-12)

    def test_length_mismatch(self, triangle):
        with pytest.raises(ValueError):
            cut_value(triangle, [0, 1])

    @given(graphs_and_sides())
    def test_symmetry_and_bounds(self, data):
        g, x = data
        c = cut_value(g, x)
        assert c == pytest.approx(cut_value(g, 1 - x), abs=1e-9)
        if (g.w >= 0).all():
            assert -1e-12 <= c <= np.maximum(g.w, 0).sum() + 1e-9


class TestGain:
    def test_single_edge(self):
        g = WeightedGraph.from_edges(2, [(0, 1)])
        assert gain_vector(g, [0, 0]).tolist() == [1, 1]
        assert gain_vector(g, [0, 1]).tolist() == [-1, -1]

    @given(graphs_and_sides())
    def test_flip_delta_oracle(self, data):
        g, x = data
        gains = gain_vector(g, x)
        base = cut_value(g, x)
        for i in range(g.n):
            y = x.copy()
            y[i] ^= 1
            assert gains[i] == pytest.approx(cut_value(g, y) - base, abs=1e-9)

    def test_apply_flip_examples(self, p3):
        g = WeightedGraph.from_edges(2, [(0, 1)])
        x, gains = apply_flip(g, np.array([0, 0]), gain_vector(g, [0, 0]), 0)
        assert x.tolist() == [1, 0] and gains.tolist() == [-1, -1]

        x0 = np.zeros(3, dtype=np.int8)
        x1, g1 = apply_flip(p3, x0, gain_vector(p3, x0), 1)
        assert np.array_equal(g1, gain_vector(p3, x1))

    def test_flip_twice_restores(self, rng):
        g = random_graph(rng, 12, signed=True)
        x = rng.integers(0, 2, 12).astype(np.int8)
        gains = gain_vector(g, x)
        x2, g2 = apply_flip(g, *apply_flip(g, x, gains, 5), 5)
        assert np.array_equal(x2, x)
        assert np.allclose(g2, gains, atol=1e-12)

    def test_flip_out_of_range(self, triangle):
        with pytest.raises(IndexError):
            apply_flip(triangle, np.zeros(3), np.zeros(3), 3)

    def test_inplace(self, triangle):
        x = np.zeros(3, dtype=np.int8)
        gains = gain_vector(triangle, x)
        apply_flip(triangle, x, gains, 0, inplace=True)
        assert x.tolist() == [1, 0, 0]


class TestGset:
    def test_minimal(self):
        g = load_gset("2 1\n1 2 5")
        assert g.n == 2 and list(g.edges()) == [(0, 1, 5.0)]

    def test_comments_and_default_weight(self):
        g = load_gset("% comment\n# other\n3 2\n1 2\n2 3 0.5\n")
        assert list(g.edges()) == [(0, 1, 1.0), (1, 2, 0.5)]

    def test_duplicates_merge(self):
        g = load_gset("2 2\n1 2 1\n2 1 2\n")
        assert list(g.edges()) == [(0, 1, 3.0)]

    @pytest.mark.parametrize("text, line", [
        ("2\n1 2 1", 1),
        ("2 1\n1 x 1", 2),
        ("2 1\n1 3 1", 2),
        ("2 1\n1 2 1 4", 2),
    ])
    def test_errors_carry_line(self, text, line):
        with pytest.raises(GraphFormatError) as info:
            load_gset(text)
        assert info.value.line == line
        assert f"line {line}" in str(info.value)

    def test_edge_count_mismatch(self):
        with pytest.raises(GraphFormatError, match="declares 2 edges"):
            load_gset("2 2\n1 2 1")

    def test_round_trip(self, rng):
        g = random_weighted_graph(30, 0.3, 7.0, seed=3)
        assert load_gset(save_gset(g)) == g
        text = save_gset(g)
        assert "\r" not in text and text.endswith("\n")

    def test_integer_weights_written_plainly(self):
        g = WeightedGraph.from_edges(2, [(0, 1, 2.0)])
        assert save_gset(g) == "2 1\n1 2 2\n"

    def test_load_graph_suffix(self, tmp_path):
        p = tmp_path / "g.mtx"
        p.write_text("%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n2 1\n")
        assert load_graph(p).m == 1
        q = tmp_path / "G"
        q.write_text("2 1\n1 2 1\n")
        assert load_graph(q).m == 1


class TestMatrixMarket:
    def test_pattern_path(self):
        text = ("%%MatrixMarket matrix coordinate pattern symmetric\n"
                "3 3 2\n2 1\n3 2\n")
        g = load_matrix_market(text)
        assert list(g.edges()) == [(0, 1, 1.0), (1, 2, 1.0)]

    def test_diagonal_dropped_and_counted(self):
        text = ("%%MatrixMarket matrix coordinate real symmetric\n"
                "3 3 2\n2 2 4.0\n3 1 1.0\n")
        g = load_matrix_market(text)
        assert g.m == 1 and g.n_self_loops == 1

    def test_signed_weight_kept(self):
        text = ("%%MatrixMarket matrix coordinate real symmetric\n"
                "% a comment\n3 3 1\n1 3 -1.5\n")
        g = load_matrix_market(text)
        assert list(g.edges()) == [(0, 2, -1.5)]

    def test_general_is_folded(self):
        text = ("%%MatrixMarket matrix coordinate real general\n"
                "2 2 2\n1 2 3.0\n2 1 3.0\n")
        assert list(load_matrix_market(text).edges()) == [(0, 1, 3.0)]

    @pytest.mark.parametrize("text", [
        "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n",
        "%%MatrixMarket matrix coordinate complex symmetric\n2 2 1\n1 2 1 0\n",
        "%%MatrixMarket matrix coordinate real symmetric\n2 3 1\n1 2 1\n",
        "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 2 1\n",
        "not a banner\n",
    ])
    def test_errors(self, text):
        with pytest.raises(GraphFormatError):
            load_matrix_market(text)


class TestGenerators:
    @pytest.mark.parametrize("b, t, nv, ne", [
        (5, 1, 252, 3150), (5, 2, 252, 12600), (6, 1, 924, 16632),
        (6, 2, 924, 103950), (2, 1, 6, 12),
    ])
    def test_karloff_sizes(self, b, t, nv, ne):
        g = karloff_generate(b, t)
        assert (g.n, g.m) == (nv, ne) == karloff_size(b, t)
        assert (g.w == 1).all() and (g.volumes == 1).all()

    def test_karloff_adjacency_rule(self):
        b, t = 3, 1
        g = karloff_generate(b, t)
        subsets = list(itertools.combinations(range(2 * b), b))
        A = g.dense()
        for i, j in itertools.combinations(range(len(subsets)), 2):
            share = len(set(subsets[i]) & set(subsets[j]))
            assert A[i, j] == (1.0 if share == t else 0.0)

    def test_karloff_closed_form(self):
        for b in (5, 6, 7):
            for t in (1, 2):
                nv = math.comb(2 * b, b)
                assert karloff_size(b, t) == (nv, nv * math.comb(b, t) ** 2 // 2)

    def test_karloff_rejects_t_ge_b(self):
        with pytest.raises(ValueError):
            karloff_generate(3, 3)

    def test_random_deterministic(self):
        assert random_weighted_graph(22, 0.5, 5, seed=7) == random_weighted_graph(22, 0.5, 5, seed=7)

    def test_random_connected(self):
        for seed in range(20):
            assert random_weighted_graph(40, 0.02, 1.0, seed=seed).is_connected()

    def test_random_complete(self):
        g = random_weighted_graph(5, 1.0, 1.0, seed=0)
        assert g.m == 10
        assert ((g.w >= 0) & (g.w < 1)).all()

    def test_random_rejects(self):
        with pytest.raises(ValueError):
            random_weighted_graph(1, 0.5, 1.0)
        with pytest.raises(ValueError):
            random_weighted_graph(5, 0.0, 1.0)
        with pytest.raises(ValueError):
            random_weighted_graph(5, 0.5, 0.0)


class TestSparseSampling:
    def test_pair_index_inverse(self):
        from mlcut.graph import _pair_from_index
        n = 41
        iu, iv = np.triu_indices(n, k=1)
        i, j = _pair_from_index(n, np.arange(iu.size))
        assert np.array_equal(i, iu) and np.array_equal(j, iv)

    def test_large_graph_path(self, monkeypatch):
        import mlcut.graph as graph_mod
        monkeypatch.setattr(graph_mod, "DENSE_PAIR_LIMIT", 100)
        g = graph_mod.random_weighted_graph(300, 0.05, 2.0, seed=1)
        assert g.n == 300 and g.is_connected()
        assert np.all(g.u < g.v)
        assert len(set(zip(g.u.tolist(), g.v.tolist()))) == g.m
        assert abs(g.m - 0.05 * 300 * 299 / 2) < 300
        assert g == graph_mod.random_weighted_graph(300, 0.05, 2.0, seed=1)
