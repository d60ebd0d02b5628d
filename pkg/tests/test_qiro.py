import itertools

import numpy as np
import pytest

from mlcut.graph import WeightedGraph, cut_value
from mlcut.localsearch import brute_force
from mlcut.qiro import (CorrelationMatrix, closed_form_trusted, correlations_p1,
                        eliminate_once, optimize_p1, qiro_solve)

from conftest import random_graph


def all_assignments(n):
    for bits in itertools.product((0, 1), repeat=n):
        yield np.array(bits, dtype=np.int8)


class TestCorrelations:
    def test_zero_gamma(self, rng):
        g = random_graph(rng, 6)
        for backend in ("closed", "statevector"):
            M = correlations_p1(g, 0.0, 0.4, backend)
            assert np.allclose(list(M.offdiag.values()), 0, atol=1e-12)

    def test_single_edge_exact_cut(self):
        g = WeightedGraph.from_edges(2, [(0, 1)])
        for backend in ("closed", "statevector"):
            M = correlations_p1(g, np.pi / 2, np.pi / 8, backend)
            assert M.offdiag[(0, 1)] == pytest.approx(-1.0, abs=1e-6)

    def test_backends_agree(self, rng):
        for _ in range(30):
            g = random_graph(rng, int(rng.integers(2, 13)), p=0.5, signed=True)
            gamma, beta = rng.uniform(0, np.pi), rng.uniform(0, np.pi / 2)
            a = correlations_p1(g, gamma, beta, "closed")
            b = correlations_p1(g, gamma, beta, "statevector")
            assert a.offdiag.keys() == b.offdiag.keys()
            for key in a.offdiag:
                assert a.offdiag[key] == pytest.approx(b.offdiag[key], abs=1e-9)
            assert np.abs(b.diag).max() <= 1e-9 and np.abs(a.diag).max() == 0

    def test_entries_bounded(self, rng):
        g = random_graph(rng, 9)
        M = correlations_p1(g, 0.8, 0.3)
        assert all(-1 - 1e-12 <= v <= 1 + 1e-12 for v in M.offdiag.values())

    def test_trusted(self):
        assert closed_form_trusted()

    def test_unknown_backend(self, triangle):
        with pytest.raises(ValueError):
            correlations_p1(triangle, 0.1, 0.1, "bogus")


class TestOptimizeP1:
    def test_single_edge(self):
        _, _, value = optimize_p1(WeightedGraph.from_edges(2, [(0, 1)]))
        assert value >= 0.999

    def test_at_least_half_weight_and_deterministic(self, rng):
        for _ in range(5):
            g = random_graph(rng, 10)
            g = g.scaled(1 / np.abs(g.w).max())
            res = optimize_p1(g, seed=1)
            assert res[2] >= g.total_weight / 2 - 1e-12
            assert res == optimize_p1(g, seed=1)

    def test_backends_same_grid(self, rng):
        g = random_graph(rng, 7)
        g = g.scaled(1 / g.w.max())
        a = optimize_p1(g, backend="closed")
        b = optimize_p1(g, backend="statevector")
        assert a[2] == pytest.approx(b[2], abs=1e-6)

    def test_edgeless(self):
        assert optimize_p1(WeightedGraph(4)) == (0.0, 0.0, 0.0)


class TestEliminate:
    def test_two_nodes(self):
        W = np.array([[0.0, 1.0], [1.0, 0.0]])
        W2, step, offset = eliminate_once(W, CorrelationMatrix(np.zeros(2), {(0, 1): -0.9}))
        assert W2.shape == (1, 1)
        assert (step.kept, step.removed, step.sign) == (0, 1, -1)
        assert offset == 1.0

    def test_triangle(self, triangle):
        M = CorrelationMatrix(np.zeros(3), {(0, 1): -0.9, (0, 2): 0.1, (1, 2): 0.1})
        W2, step, offset = eliminate_once(triangle, M)
        assert W2.shape == (2, 2) and not W2.any()
        assert offset + brute_force(WeightedGraph.from_adjacency(W2))[1] == 2
        assert brute_force(triangle)[1] == 2

    def test_zero_correlation_merges_same_side(self):
        W = np.array([[0.0, 2.0], [2.0, 0.0]])
        _, step, offset = eliminate_once(W, CorrelationMatrix(np.zeros(2), {(0, 1): 0.0}))
        assert step.sign == 1 and offset == 0.0

    def test_tie_breaks(self):
        W = np.zeros((4, 4))
        W[0, 1] = W[1, 0] = 1.0
        W[2, 3] = W[3, 2] = 3.0
        M = CorrelationMatrix(np.zeros(4), {(0, 1): 0.5, (2, 3): -0.5})
        _, step, _ = eliminate_once(W, M)
        assert (step.kept, step.removed) == (2, 3)

    def test_edgeless_error(self):
        with pytest.raises(ValueError):
            eliminate_once(np.zeros((3, 3)), CorrelationMatrix(np.zeros(3), {}))

    def test_soundness_exhaustive(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 9))
            g = random_graph(rng, n, p=0.6, signed=True)
            if g.m == 0:
                continue
            vals = rng.uniform(-1, 1, g.m)
            M = CorrelationMatrix(np.zeros(n), dict(zip(zip(g.u.tolist(), g.v.tolist()),
                                                        vals.tolist())))
            W2, step, offset = eliminate_once(g, M)
            assert W2.shape == (n - 1, n - 1)
            small = WeightedGraph.from_adjacency(W2)
            keep = [k for k in range(n) if k != step.removed]
            for x in all_assignments(n):
                if x[step.removed] != x[step.kept] ^ (step.sign < 0):
                    continue
                assert cut_value(g, x) == pytest.approx(
                    cut_value(small, x[keep]) + offset, abs=1e-9)


class TestSolve:
    def test_small_is_exact(self, rng):
        g = random_graph(rng, 9)
        assert cut_value(g, qiro_solve(g, 10)) == pytest.approx(brute_force(g)[1])

    def test_p4(self):
        g = WeightedGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        assert cut_value(g, qiro_solve(g, smallest_size=1)) == 3

    def test_bookkeeping_identity(self, rng):
        for _ in range(20):
            n = int(rng.integers(4, 15))
            g = random_graph(rng, n, p=0.5)
            x, trace = qiro_solve(g, smallest_size=3, return_trace=True)
            term = WeightedGraph.from_adjacency(trace.terminal_weights)
            assert cut_value(g, x) == pytest.approx(
                brute_force(term)[1] + trace.offset, abs=1e-9)
            assert len(trace.steps) == n - trace.terminal_weights.shape[0]

    def test_trace_json(self, rng):
        g = random_graph(rng, 12, p=0.5)
        _, trace = qiro_solve(g, smallest_size=8, return_trace=True)
        dumped = trace.to_json()
        assert len(dumped) == 4
        assert set(dumped[0]) == {"kept", "removed", "sign", "edge_weight", "M_value"}

    def test_deterministic(self, rng):
        g = random_graph(rng, 16, p=0.4)
        assert np.array_equal(qiro_solve(g, seed=3), qiro_solve(g, seed=3))

    def test_edgeless(self):
        assert qiro_solve(WeightedGraph(15)).tolist() == [0] * 15

    def test_quality_on_subproblem_sizes(self, rng):
        ratios = []
        for _ in range(5):
            g = random_graph(rng, 18, p=0.3)
            ratios.append(cut_value(g, qiro_solve(g)) / brute_force(g)[1])
        assert np.median(ratios) >= 0.9
