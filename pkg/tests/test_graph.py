"""Weight-matrix construction, spanning-tree detection, spectral summaries."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import topopriv as tp
from topopriv.errors import EmptyGraph, InvalidGamma, SpanningTreeUnreachable


class TestLaplacianWeights:
    @pytest.mark.filterwarnings("ignore:gamma = 1")
    def test_two_node_swap_gamma_one(self):
        adj = tp.Adjacency(2, frozenset({(0, 1), (1, 0)}))
        W = tp.laplacian_weights(adj, 1.0)
        np.testing.assert_array_equal(W.W, [[0.0, 1.0], [1.0, 0.0]])

    def test_two_node_half_gamma(self):
        adj = tp.Adjacency(2, frozenset({(0, 1), (1, 0)}))
        W = tp.laplacian_weights(adj, 0.5)
        np.testing.assert_array_equal(W.W, [[0.5, 0.5], [0.5, 0.5]])

    def test_row_sums_on_random_graph(self):
        adj = tp.random_digraph(7, 0.5, seed=3)
        W = tp.laplacian_weights(adj, 0.5)
        np.testing.assert_allclose(W.W.sum(axis=1), 1.0, atol=1e-12)

    def test_offdiagonal_support_matches_edges(self):
        adj = tp.random_digraph(6, 0.4, seed=11)
        W = tp.laplacian_weights(adj, 0.5)
        support = {
            (i, j)
            for i in range(6)
            for j in range(6)
            if i != j and W.W[i, j] > 0
        }
        assert support == set(adj.edges)

    def test_diagonal_floor(self):
        adj = tp.random_digraph(5, 0.8, seed=2)
        W = tp.laplacian_weights(adj, 0.7)
        assert np.all(np.diag(W.W) >= 1 - 0.7 - 1e-15)

    def test_empty_graph_errors(self):
        with pytest.raises(EmptyGraph):
            tp.laplacian_weights(tp.Adjacency(3, frozenset()), 0.5)

    def test_single_node_graph(self):
        W = tp.laplacian_weights(tp.Adjacency(1, frozenset()), 0.5)
        np.testing.assert_array_equal(W.W, [[1.0]])

    @pytest.mark.parametrize("gamma", [0.0, -0.2, 1.5])
    def test_invalid_gamma(self, gamma):
        adj = tp.Adjacency(2, frozenset({(0, 1), (1, 0)}))
        with pytest.raises(InvalidGamma):
            tp.laplacian_weights(adj, gamma)

    def test_gamma_one_periodic_warns(self):
        adj = tp.Adjacency(2, frozenset({(0, 1), (1, 0)}))
        with pytest.warns(UserWarning, match="non-primitive"):
            tp.laplacian_weights(adj, 1.0)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), n=st.integers(2, 12))
    def test_invariants_property(self, seed, n):
        adj = tp.random_digraph(n, 0.6, seed=seed)
        W = tp.laplacian_weights(adj, 0.5).W
        assert np.all(W >= 0) and np.all(W <= 1)
        np.testing.assert_allclose(W.sum(axis=1), 1.0, atol=1e-12)


class TestRandomDigraph:
    def test_single_node(self):
        adj = tp.random_digraph(1, 0.5, seed=0)
        assert adj.edges == frozenset()
        assert tp.has_spanning_tree(adj)

    def test_complete_at_probability_one(self):
        adj = tp.random_digraph(4, 1.0, seed=0)
        assert len(adj.edges) == 12

    def test_deterministic(self):
        a = tp.random_digraph(7, 0.4, seed=42)
        b = tp.random_digraph(7, 0.4, seed=42)
        assert a.edges == b.edges

    def test_different_seeds_differ(self):
        a = tp.random_digraph(7, 0.4, seed=1)
        b = tp.random_digraph(7, 0.4, seed=2)
        assert a.edges != b.edges

    def test_unreachable_spanning_tree(self):
        with pytest.raises(SpanningTreeUnreachable):
            tp.random_digraph(30, 0.001, seed=5)


class TestSpanningTree:
    def test_star_listening_to_center(self):
        # every spoke listens to node 0, so node 0's information reaches all
        adj = tp.Adjacency(5, frozenset((i, 0) for i in range(1, 5)))
        assert tp.has_spanning_tree(adj)

    def test_two_disjoint_cycles(self):
        adj = tp.Adjacency(4, frozenset({(0, 1), (1, 0), (2, 3), (3, 2)}))
        assert not tp.has_spanning_tree(adj)

    def test_complete_digraph(self):
        edges = frozenset((i, j) for i in range(4) for j in range(4) if i != j)
        assert tp.has_spanning_tree(tp.Adjacency(4, edges))

    def test_broadcast_star_reversed(self):
        # node 0 listens to everyone, but nobody hears anyone: no root
        adj = tp.Adjacency(4, frozenset((0, j) for j in range(1, 4)))
        assert not tp.has_spanning_tree(adj)


class TestSpectralSummary:
    def test_rank_one_doubly_stochastic(self):
        s = tp.spectral_summary(np.array([[0.5, 0.5], [0.5, 0.5]]))
        np.testing.assert_allclose(s.eigen_moduli, [1.0, 0.0], atol=1e-12)
        assert s.leading_is_simple

    def test_periodic_permutation(self):
        s = tp.spectral_summary(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(s.eigen_moduli, [1.0, 1.0], atol=1e-12)
        assert not s.leading_is_simple

    def test_seven_node_consensus(self, seven_node_w):
        s = tp.spectral_summary(seven_node_w)
        assert abs(s.spectral_radius - 1.0) < 1e-9
        assert s.leading_is_simple
        assert s.spectral_radius == s.eigen_moduli[0]


class TestSerialization:
    def test_adjacency_round_trip(self):
        adj = tp.random_digraph(6, 0.5, seed=8)
        assert tp.Adjacency.from_text(adj.to_text()).edges == adj.edges

    def test_topology_csv_round_trip(self, seven_node_w):
        W2 = tp.TopologyMatrix.from_csv(seven_node_w.to_csv())
        np.testing.assert_array_equal(W2.W, seven_node_w.W)

    def test_invalid_matrix_rejected(self):
        with pytest.raises(ValueError, match="sum"):
            tp.TopologyMatrix(n=2, W=np.array([[0.5, 0.4], [0.5, 0.5]]))
