import numpy as np
import pytest

from hypergcn.hypergraph import Hypergraph, degrees, size_counts, validate


class TestValidate:
    def test_valid_hypergraph(self):
        h = Hypergraph.from_edges(3, [(0, 1, 2)])
        assert validate(h) == []

    def test_vertex_out_of_range(self):
        h = Hypergraph.from_edges(3, [(0, 3)])
        problems = validate(h)
        assert len(problems) == 1
        assert "vertex 3 out of range" in problems[0]
        assert "hyperedge 0" in problems[0]

    def test_singleton_hyperedge(self):
        h = Hypergraph.from_edges(2, [(1,)])
        problems = validate(h)
        assert any("size 1 < 2" in p for p in problems)

    def test_reports_every_violation(self):
        h = Hypergraph.from_edges(2, [(0,), (0, 5)], weights=[1.0, -2.0])
        problems = validate(h)
        assert len(problems) == 3  # size, range, weight

    def test_nonpositive_and_nonfinite_weights(self):
        h = Hypergraph.from_edges(3, [(0, 1), (1, 2)], weights=[0.0, np.inf])
        assert len(validate(h)) == 2

    def test_duplicate_hyperedges_allowed(self):
        h = Hypergraph.from_edges(2, [(0, 1), (0, 1)])
        assert validate(h) == []

    def test_from_edges_dedupes_within_edge(self):
        h = Hypergraph.from_edges(3, [(2, 0, 2, 1)])
        assert h.edges == ((0, 1, 2),)


class TestDegrees:
    def test_unit_weights(self):
        h = Hypergraph.from_edges(3, [(0, 1), (0, 2)])
        np.testing.assert_array_equal(degrees(h), [2.0, 1.0, 1.0])

    def test_weighted(self):
        h = Hypergraph.from_edges(3, [(0, 1, 2)], weights=[0.5])
        np.testing.assert_array_equal(degrees(h), [0.5, 0.5, 0.5])

    def test_no_edges(self):
        h = Hypergraph.from_edges(4, [])
        np.testing.assert_array_equal(degrees(h), np.zeros(4))

    def test_degree_sum_identity(self):
        # sum of degrees equals sum of |e| * w(e)
        rng = np.random.default_rng(42)
        for _ in range(20):
            n = int(rng.integers(3, 20))
            m = int(rng.integers(1, 15))
            edges = [
                rng.choice(n, size=int(rng.integers(2, min(n, 6) + 1)), replace=False)
                for _ in range(m)
            ]
            w = rng.uniform(0.1, 3.0, size=m)
            h = Hypergraph.from_edges(n, edges, w)
            expected = sum(len(e) * we for e, we in zip(h.edges, h.weights))
            assert degrees(h).sum() == pytest.approx(expected)

    def test_linear_in_weights(self):
        rng = np.random.default_rng(7)
        edges = [(0, 1, 2), (1, 3), (0, 3, 4)]
        w = rng.uniform(0.5, 2.0, size=3)
        h1 = Hypergraph.from_edges(5, edges, w)
        h2 = Hypergraph.from_edges(5, edges, 3.0 * w)
        np.testing.assert_allclose(degrees(h2), 3.0 * degrees(h1), rtol=1e-15)


class TestSizeCounts:
    @pytest.mark.parametrize(
        "sizes,expected",
        [
            ([5], (5, 7, 10)),
            ([3], (3, 3, 3)),
            ([2, 4], (6, 6, 7)),
        ],
    )
    def test_examples(self, sizes, expected):
        edges = []
        start = 0
        for s in sizes:
            edges.append(tuple(range(start, start + s)))
            start += s
        h = Hypergraph.from_edges(start, edges)
        assert size_counts(h) == expected

    def test_mediator_budget_never_exceeds_clique(self):
        # equality holds exactly when every size is 2 or 3
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = 30
            sizes = rng.integers(2, 9, size=rng.integers(1, 8))
            edges = [rng.choice(n, size=s, replace=False) for s in sizes]
            h = Hypergraph.from_edges(n, edges)
            _, n_med, n_clq = size_counts(h)
            assert n_med <= n_clq
            if all(s in (2, 3) for s in sizes):
                assert n_med == n_clq
            if any(s > 3 for s in sizes):
                assert n_med < n_clq
