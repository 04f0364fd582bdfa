import numpy as np
import pytest

from linkconformal.errors import CapacityError, EdgeListParseError
from linkconformal.graph import (
    EdgeSplit,
    Graph,
    LabeledEdge,
    degree_sequence,
    ensure_features,
    generate_latent_powerlaw_graph,
    generate_powerlaw_graph,
    inject_cliques,
    load_edge_list,
    load_features,
    negative_sample,
    split_edges,
    training_subgraph,
)
from linkconformal.powerlaw import fit_power_law


def path_graph(n):
    return Graph(n, frozenset((i, i + 1) for i in range(n - 1)))


class TestGraphType:
    def test_normalizes_and_dedups(self):
        g = Graph(3, frozenset({(1, 0), (0, 1), (1, 2)}))
        assert g.edges == frozenset({(0, 1), (1, 2)})
        assert g.num_edges == 2

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Graph(3, frozenset({(1, 1)}))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Graph(3, frozenset({(0, 3)}))
        with pytest.raises(ValueError):
            Graph(3, frozenset({(-1, 2)}))

    def test_degree_sum_is_twice_edges(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            n = int(rng.integers(5, 40))
            pairs = {(int(a), int(b)) for a, b in rng.integers(0, n, size=(30, 2)) if a != b}
            g = Graph(n, frozenset(pairs))
            assert degree_sequence(g).sum() == 2 * g.num_edges

    def test_features_validated_and_frozen(self):
        g = Graph(2, frozenset({(0, 1)}), features=[[1.0], [2.0]])
        assert not g.features.flags.writeable
        with pytest.raises(ValueError):
            Graph(2, frozenset(), features=np.zeros((3, 2)))


class TestLoadEdgeList:
    def test_basic_parse(self):
        g = load_edge_list("0 1\n1 2")
        assert g.num_nodes == 3
        assert g.edges == frozenset({(0, 1), (1, 2)})

    def test_undirected_dedup(self):
        with pytest.warns(UserWarning):
            g = load_edge_list("0 1\n1 0")
        assert g.edges == frozenset({(0, 1)})

    def test_parse_error_with_line(self):
        with pytest.raises(EdgeListParseError) as err:
            load_edge_list("0 a")
        assert err.value.line_number == 1

    def test_token_count_error(self):
        with pytest.raises(EdgeListParseError):
            load_edge_list("0 1 2")

    def test_negative_index(self):
        with pytest.raises(ValueError):
            load_edge_list("0 -1")

    def test_comments_and_hint(self):
        g = load_edge_list("# header\n0 1\n", num_nodes_hint=10)
        assert g.num_nodes == 10

    def test_empty_needs_hint(self):
        with pytest.raises(ValueError):
            load_edge_list("# nothing\n")
        assert load_edge_list("", num_nodes_hint=4).num_nodes == 4


class TestLoadFeatures:
    def test_round_trip(self):
        feats = load_features("0 1.5 2.0\n2 0.5 -1.0\n", num_nodes=3)
        assert feats.shape == (3, 2)
        assert feats[1].tolist() == [0.0, 0.0]
        assert feats[2].tolist() == [0.5, -1.0]

    def test_dim_mismatch(self):
        with pytest.raises(EdgeListParseError):
            load_features("0 1.0\n1 1.0 2.0\n", num_nodes=2)


class TestNegativeSample:
    def test_complete_graph_capacity(self):
        g = Graph(3, frozenset({(0, 1), (0, 2), (1, 2)}))
        with pytest.raises(CapacityError):
            negative_sample(g, 1, seed=0)

    def test_unique_non_edge(self):
        assert negative_sample(path_graph(3), 1, seed=0) == [(0, 2)]

    def test_determinism(self):
        rng = np.random.default_rng(1)
        pairs = {(int(a), int(b)) for a, b in rng.integers(0, 100, size=(50, 2)) if a != b}
        g = Graph(100, frozenset(pairs))
        a = negative_sample(g, 50, seed=7)
        b = negative_sample(g, 50, seed=7)
        assert a == b
        assert negative_sample(g, 50, seed=8) != a

    def test_avoids_edges_and_self_loops(self):
        g = path_graph(20)
        out = negative_sample(g, 100, seed=3)
        assert len(set(out)) == 100
        for u, v in out:
            assert u < v
            assert (u, v) not in g.edges

    def test_exhaustive_draw(self):
        g = path_graph(6)
        capacity = 6 * 5 // 2 - g.num_edges
        out = negative_sample(g, capacity, seed=0)
        assert len(out) == capacity


class TestSplitEdges:
    def test_counts_with_remainder(self):
        pos = [(0, i + 1) for i in range(10)]
        neg = [(1, i + 2) for i in range(10)]
        split = split_edges(pos, neg, (0.5, 0.1, 0.2, 0.2), seed=0)
        assert [len(s) for s in (split.train, split.val, split.calib, split.test)] == [10, 2, 4, 4]

    def test_degenerate_all_train(self):
        pos = [(0, 1), (1, 2)]
        neg = [(0, 2), (0, 3)]
        split = split_edges(pos, neg, (1, 0, 0, 0), seed=0)
        assert len(split.train) == 4
        assert split.val == split.calib == split.test == ()

    def test_class_balance_per_subset(self):
        pos = [(0, i + 1) for i in range(21)]
        neg = [(1, i + 2) for i in range(21)]
        split = split_edges(pos, neg, (0.5, 0.1, 0.2, 0.2), seed=5)
        for subset in (split.train, split.val, split.calib, split.test):
            n_pos = sum(e.label for e in subset)
            assert 2 * n_pos == len(subset)

    def test_union_preserved(self):
        pos = [(0, i + 1) for i in range(12)]
        neg = [(1, i + 2) for i in range(12)]
        split = split_edges(pos, neg, (0.4, 0.2, 0.2, 0.2), seed=2)
        got = sorted((e.u, e.v, e.label) for s in split.subsets.values() for e in s)
        want = sorted([(u, v, 1) for u, v in pos] + [(u, v, 0) for u, v in neg])
        assert got == want

    def test_bad_ratios(self):
        with pytest.raises(ValueError):
            split_edges([(0, 1)], [(0, 2)], (0.5, 0.5, 0.5, 0.5), seed=0)
        with pytest.raises(ValueError):
            split_edges([(0, 1)], [(0, 2)], (0.5, 0.6, -0.1, 0.0), seed=0)

    def test_count_mismatch(self):
        with pytest.raises(ValueError):
            split_edges([(0, 1), (1, 2)], [(0, 2)], (0.25, 0.25, 0.25, 0.25), seed=0)


class TestEdgeSplitType:
    def test_rejects_duplicates_across_subsets(self):
        with pytest.raises(ValueError):
            EdgeSplit(
                train=(LabeledEdge(0, 1, 1), LabeledEdge(0, 2, 0)),
                val=(LabeledEdge(1, 0, 1), LabeledEdge(0, 3, 0)),
                calib=(),
                test=(),
            )

    def test_rejects_imbalance(self):
        with pytest.raises(ValueError):
            EdgeSplit(
                train=(LabeledEdge(0, 1, 1), LabeledEdge(1, 2, 1), LabeledEdge(2, 3, 1)),
                val=(),
                calib=(),
                test=(),
            )


class TestTrainingSubgraph:
    def make_split(self):
        train = (LabeledEdge(0, 1, 1), LabeledEdge(1, 2, 1), LabeledEdge(2, 3, 1),
                 LabeledEdge(3, 4, 1), LabeledEdge(0, 5, 0), LabeledEdge(0, 6, 0),
                 LabeledEdge(0, 7, 0), LabeledEdge(1, 7, 0))
        val = (LabeledEdge(4, 5, 1), LabeledEdge(2, 7, 0))
        calib = (LabeledEdge(5, 6, 1), LabeledEdge(3, 7, 0))
        test = (LabeledEdge(6, 7, 1), LabeledEdge(4, 7, 0))
        return EdgeSplit(train, val, calib, test)

    def test_includes_train_val_positives_only(self):
        g = Graph(8, frozenset({(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)}))
        split = self.make_split()
        sub = training_subgraph(g, split)
        assert sub.num_edges == 5
        assert (5, 6) not in sub.edges and (6, 7) not in sub.edges

    def test_empty_warns(self):
        g = Graph(4, frozenset({(0, 1)}))
        split = EdgeSplit((LabeledEdge(0, 2, 0),), (), (LabeledEdge(0, 1, 1), LabeledEdge(0, 3, 0)), ())
        with pytest.warns(UserWarning):
            sub = training_subgraph(g, split)
        assert sub.num_edges == 0


class TestDegreeSequence:
    def test_triangle(self):
        g = Graph(3, frozenset({(0, 1), (1, 2), (0, 2)}))
        assert degree_sequence(g).tolist() == [2, 2, 2]

    def test_star(self):
        g = Graph(4, frozenset({(0, 1), (0, 2), (0, 3)}))
        assert sorted(degree_sequence(g).tolist()) == [1, 1, 1, 3]

    def test_drop_isolated(self):
        g = Graph(5, frozenset({(0, 1)}))
        assert degree_sequence(g, drop_isolated=True).tolist() == [1, 1]
        assert degree_sequence(g).tolist() == [1, 1, 0, 0, 0]


class TestInjectCliques:
    def test_edge_count_on_empty(self):
        g = Graph(5)
        out = inject_cliques(g, 3, 1, seed=0)
        assert out.num_edges == 3

    def test_identity_when_zero(self):
        g = path_graph(5)
        assert inject_cliques(g, 3, 0, seed=0) is g

    def test_never_decreases(self):
        g = path_graph(30)
        rng = np.random.default_rng(0)
        for _ in range(5):
            out = inject_cliques(g, int(rng.integers(2, 10)), int(rng.integers(1, 4)), seed=int(rng.integers(1000)))
            assert out.num_edges >= g.num_edges
            assert g.edges <= out.edges

    def test_validation(self):
        g = path_graph(5)
        with pytest.raises(ValueError):
            inject_cliques(g, 1, 1, seed=0)
        with pytest.raises(ValueError):
            inject_cliques(g, 6, 1, seed=0)

    def test_deterministic(self):
        g = path_graph(40)
        assert inject_cliques(g, 5, 3, seed=9).edges == inject_cliques(g, 5, 3, seed=9).edges


class TestGeneratePowerlawGraph:
    def test_deterministic(self):
        a = generate_powerlaw_graph(200, 2.5, 1, seed=4)
        b = generate_powerlaw_graph(200, 2.5, 1, seed=4)
        assert a.edges == b.edges

    def test_matching_limit(self):
        # enormous beta concentrates every degree at 1: stub pairing gives
        # a (partial) matching, so every node has degree <= 1
        g = generate_powerlaw_graph(100, 50.0, 1, seed=2)
        assert degree_sequence(g).max() <= 1

    def test_exponent_recovery(self):
        g = generate_powerlaw_graph(2000, 2.5, 1, seed=7)
        fit = fit_power_law(degree_sequence(g, drop_isolated=True))
        assert 2.3 <= fit.beta_hat <= 2.7

    def test_validations(self):
        with pytest.raises(ValueError):
            generate_powerlaw_graph(5, 2.5, 1, seed=0)
        with pytest.raises(ValueError):
            generate_powerlaw_graph(100, 1.0, 1, seed=0)
        with pytest.raises(ValueError):
            generate_powerlaw_graph(100, 2.5, 0, seed=0)


class TestLatentPowerlawGraph:
    def test_features_attached_and_deterministic(self):
        a = generate_latent_powerlaw_graph(100, 2.5, 2, 8, seed=3)
        b = generate_latent_powerlaw_graph(100, 2.5, 2, 8, seed=3)
        assert a.features.shape == (100, 8)
        assert a.edges == b.edges
        assert np.array_equal(a.features, b.features)

    def test_homophily_wires_similar_nodes(self):
        g = generate_latent_powerlaw_graph(300, 2.5, 4, 8, seed=1, homophily=10.0)
        x = g.features / np.linalg.norm(g.features, axis=1, keepdims=True)
        edge_arr = g.edge_array()
        cos_edges = np.mean(np.sum(x[edge_arr[:, 0]] * x[edge_arr[:, 1]], axis=1))
        rng = np.random.default_rng(0)
        pairs = rng.integers(0, 300, size=(2000, 2))
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        cos_rand = np.mean(np.sum(x[pairs[:, 0]] * x[pairs[:, 1]], axis=1))
        assert cos_edges > cos_rand + 0.1


class TestEnsureFeatures:
    def test_fills_missing(self):
        g = path_graph(5)
        out = ensure_features(g, 3, seed=0)
        assert out.features.shape == (5, 3)
        again = ensure_features(g, 3, seed=0)
        assert np.array_equal(out.features, again.features)

    def test_keeps_existing(self):
        g = Graph(2, frozenset({(0, 1)}), features=[[1.0], [2.0]])
        assert ensure_features(g, 7, seed=0) is g
