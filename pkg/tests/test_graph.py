import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphscat.errors import (
    DimensionMismatch,
    DuplicateEdge,
    IsolatedNodeError,
    IsolatedNodeWarning,
    NonSymmetricInput,
    SelfLoopError,
)
from graphscat.graph import (
    LAZY_WALK,
    RANDOM_WALK,
    RENORM_ADJACENCY,
    SYM_NORM_ADJACENCY,
    apply_operator,
    apply_operator_transpose,
    build_graph,
    neighborhood,
    operator_power_apply,
    read_edge_list,
    residual_diffusion,
    write_edge_list,
)

from conftest import dense_ops, random_connected_graph


def two_coloring(n):
    return np.array([1.0 if i % 2 == 0 else -1.0 for i in range(n)])


def cycle(n):
    return [(i, (i + 1) % n) for i in range(n)]


class TestBuildGraph:
    def test_triangle_degrees(self):
        g = build_graph([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
        assert np.array_equal(g.degrees, [2.0, 2.0, 2.0])

    def test_path_degrees(self):
        g = build_graph([(0, 1, 1.0), (1, 2, 1.0)])
        assert np.array_equal(g.degrees, [1.0, 2.0, 1.0])

    def test_conflicting_weights_rejected(self):
        with pytest.raises(NonSymmetricInput):
            build_graph([(0, 1, 0.5), (1, 0, 0.7)])

    def test_exact_duplicate_rejected(self):
        with pytest.raises(DuplicateEdge):
            build_graph([(0, 1, 0.5), (1, 0, 0.5)])

    def test_self_loop_rejected(self):
        with pytest.raises(SelfLoopError):
            build_graph([(0, 0, 1.0)])

    def test_nonpositive_weight_rejected(self):
        with pytest.raises(ValueError):
            build_graph([(0, 1, 0.0)])

    def test_isolated_node_warning(self):
        with pytest.warns(IsolatedNodeWarning):
            g = build_graph([(0, 1)], n=3)
        assert g.has_isolated_nodes

    def test_neighbor_lists_sorted(self, rng):
        _, g = random_connected_graph(rng, 30)
        for v in range(g.n):
            nbrs = g.neighbors(v)
            assert np.all(np.diff(nbrs) > 0)

    def test_degrees_match_row_sums(self, rng):
        edges, g = random_connected_graph(rng, 25, weighted=True)
        W = dense_ops(25, edges)["W"]
        assert np.allclose(g.degrees, W.sum(axis=1), atol=1e-12)

    def test_immutable_arrays(self):
        g = build_graph(cycle(4))
        with pytest.raises(ValueError):
            g.degrees[0] = 5.0


class TestApplyOperator:
    def test_c4_lazy_walk_annihilates_two_coloring(self):
        g = build_graph(cycle(4))
        out = apply_operator(g, LAZY_WALK, two_coloring(4))
        assert np.array_equal(out, np.zeros(4))

    def test_regular_graph_constant_fixed(self):
        g = build_graph(cycle(6))
        x = np.full(6, 3.25)
        assert np.allclose(apply_operator(g, LAZY_WALK, x), x, atol=1e-12)

    def test_residual_alpha_zero_is_identity(self, rng):
        edges, g = random_connected_graph(rng, 10)
        X = rng.standard_normal((10, 3))
        assert np.array_equal(apply_operator(g, residual_diffusion(0.0), X), X)

    def test_dimension_mismatch(self):
        g = build_graph(cycle(4))
        with pytest.raises(DimensionMismatch):
            apply_operator(g, LAZY_WALK, np.zeros(5))

    def test_isolated_node_rejected_at_apply_time(self):
        with pytest.warns(IsolatedNodeWarning):
            g = build_graph([(0, 1)], n=3)
        for kind in (LAZY_WALK, RANDOM_WALK, SYM_NORM_ADJACENCY, residual_diffusion(1.0)):
            with pytest.raises(IsolatedNodeError):
                apply_operator(g, kind, np.zeros(3))
        # renormalized adjacency adds self-loops, degree zero is fine there
        apply_operator(g, RENORM_ADJACENCY, np.zeros(3))

    @pytest.mark.parametrize("kind,key", [
        (LAZY_WALK, "P"), (RENORM_ADJACENCY, "A"), (RANDOM_WALK, "R"),
        (SYM_NORM_ADJACENCY, "sym"), (residual_diffusion(0.7), None),
    ])
    def test_matches_dense_oracle(self, rng, kind, key):
        edges, g = random_connected_graph(rng, 23, weighted=True)
        ops = dense_ops(23, edges)
        M = ops[key] if key else ops["res"](0.7)
        X = rng.standard_normal((23, 4))
        assert np.allclose(apply_operator(g, kind, X), M @ X, atol=1e-12)

    @pytest.mark.parametrize("kind", [LAZY_WALK, RENORM_ADJACENCY, RANDOM_WALK,
                                      SYM_NORM_ADJACENCY, residual_diffusion(0.3)])
    def test_transpose_matches_dense_oracle(self, rng, kind):
        edges, g = random_connected_graph(rng, 17, weighted=True)
        ops = dense_ops(17, edges)
        dense = {"lazy_walk": ops["P"], "renorm_adjacency": ops["A"],
                 "random_walk": ops["R"], "sym_norm_adjacency": ops["sym"],
                 "residual_diffusion": ops["res"](0.3)}[kind.tag]
        X = rng.standard_normal((17, 3))
        assert np.allclose(apply_operator_transpose(g, kind, X), dense.T @ X, atol=1e-12)

    def test_input_unchanged(self, rng):
        edges, g = random_connected_graph(rng, 8)
        X = rng.standard_normal((8, 2))
        X0 = X.copy()
        apply_operator(g, LAZY_WALK, X)
        assert np.array_equal(X, X0)


class TestOperatorPower:
    def test_power_one_equals_apply(self, rng):
        edges, g = random_connected_graph(rng, 12)
        X = rng.standard_normal((12, 2))
        assert np.array_equal(operator_power_apply(g, LAZY_WALK, 1, X),
                              apply_operator(g, LAZY_WALK, X))

    def test_c6_two_steps_annihilate_two_coloring(self):
        g = build_graph(cycle(6))
        out = operator_power_apply(g, LAZY_WALK, 2, two_coloring(6))
        assert np.allclose(out, 0.0, atol=1e-12)

    def test_column_sums_preserved(self, rng):
        edges, g = random_connected_graph(rng, 20)
        X = rng.standard_normal((20, 3))
        for t in (1, 3, 5):
            out = operator_power_apply(g, LAZY_WALK, t, X)
            assert np.allclose(out.sum(axis=0), X.sum(axis=0), atol=1e-10)

    def test_matches_dense_power_oracle(self, rng):
        edges, g = random_connected_graph(rng, 11, weighted=True)
        P = dense_ops(11, edges)["P"]
        X = rng.standard_normal((11, 2))
        assert np.allclose(operator_power_apply(g, LAZY_WALK, 4, X),
                           np.linalg.matrix_power(P, 4) @ X, atol=1e-10)

    def test_rejects_nonpositive_power(self):
        g = build_graph(cycle(4))
        with pytest.raises(ValueError):
            operator_power_apply(g, LAZY_WALK, 0, np.zeros(4))


class TestNeighborhood:
    def test_path_radius_one(self):
        g = build_graph([(0, 1), (1, 2)])
        assert neighborhood(g, 0, 1) == {1}

    def test_path_radius_two(self):
        g = build_graph([(0, 1), (1, 2)])
        assert neighborhood(g, 0, 2) == {1, 2}

    def test_radius_zero(self):
        g = build_graph(cycle(5))
        assert neighborhood(g, 2, 0) == set()
        assert neighborhood(g, 2, 0, closed=True) == {2}

    def test_bfs_semantics_against_matrix_oracle(self, rng):
        edges, g = random_connected_graph(rng, 15)
        ops = dense_ops(15, edges)
        reach = np.eye(15, dtype=bool)
        adj = ops["W"] > 0
        for K in range(4):
            if K > 0:
                reach = reach | (reach @ adj)
            for v in range(15):
                expected = set(np.flatnonzero(reach[v])) - {v}
                assert neighborhood(g, v, K) == expected


class TestInvariantProperties:
    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_mass_conservation(self, seed):
        r = np.random.default_rng(seed)
        n = int(r.integers(4, 40))
        _, g = random_connected_graph(r, n)
        X = r.standard_normal((n, 2))
        out = apply_operator(g, LAZY_WALK, X)
        assert np.max(np.abs(out.sum(axis=0) - X.sum(axis=0))) < 1e-10

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_weighted_self_adjointness(self, seed):
        r = np.random.default_rng(seed)
        n = int(r.integers(4, 40))
        _, g = random_connected_graph(r, n)
        x, y = r.standard_normal(n), r.standard_normal(n)
        px = apply_operator(g, LAZY_WALK, x)
        py = apply_operator(g, LAZY_WALK, y)
        lhs = px @ (y / g.degrees)
        rhs = x @ (py / g.degrees)
        assert abs(lhs - rhs) < 1e-10

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_linearity(self, seed):
        r = np.random.default_rng(seed)
        n = int(r.integers(4, 30))
        _, g = random_connected_graph(r, n)
        X, Y = r.standard_normal((n, 2)), r.standard_normal((n, 2))
        a, b = float(r.uniform(-2, 2)), float(r.uniform(-2, 2))
        lhs = apply_operator(g, LAZY_WALK, a * X + b * Y)
        rhs = a * apply_operator(g, LAZY_WALK, X) + b * apply_operator(g, LAZY_WALK, Y)
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    def test_permutation_equivariance(self, rng):
        n = 18
        edges, g = random_connected_graph(rng, n, weighted=True)
        perm = rng.permutation(n)
        inv = np.argsort(perm)
        pedges = [(int(perm[u]), int(perm[v]), w) for u, v, w in edges]
        pg = build_graph(pedges, n=n)
        X = rng.standard_normal((n, 3))
        out = apply_operator(g, LAZY_WALK, X)
        pout = apply_operator(pg, LAZY_WALK, X[inv])
        assert np.max(np.abs(pout - out[inv])) < 1e-12


class TestEdgeListIO:
    def test_round_trip(self, tmp_path, rng):
        edges, g = random_connected_graph(rng, 12, weighted=True)
        path = tmp_path / "edges.tsv"
        write_edge_list(g, path)
        g2 = read_edge_list(path)
        assert g2.n == g.n
        assert np.array_equal(g2.csr_offsets, g.csr_offsets)
        assert np.array_equal(g2.csr_targets, g.csr_targets)
        assert np.allclose(g2.csr_weights, g.csr_weights)

    def test_comments_default_weight_and_dedup(self, tmp_path):
        path = tmp_path / "edges.tsv"
        path.write_text("# a comment\n0\t1\n1\t2\t2.5\n2\t1\t2.5\n")
        g = read_edge_list(path)
        assert g.n == 3
        assert g.num_edges == 2
        assert g.degrees[1] == pytest.approx(3.5)

    def test_conflicting_weights_on_load(self, tmp_path):
        path = tmp_path / "edges.tsv"
        path.write_text("0\t1\t1.0\n1\t0\t2.0\n")
        with pytest.raises(NonSymmetricInput):
            read_edge_list(path)
