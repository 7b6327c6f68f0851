import numpy as np
import pytest
import scipy.sparse as sp

from signwalk.errors import ConfigError, ConvergenceError
from signwalk.graph import SignedGraph, generate_balanced_graph
from signwalk.srwr import (
    SrwrConfig,
    build_diffusion_matrix,
    load_diffusion,
    save_diffusion,
    semi_row_normalize,
    srwr_rank,
)


def ring_graph(n, extra_neg=(), seed=None):
    """Ring of positive edges (never dangling) plus optional negative chords."""
    pos = [(i, (i + 1) % n) for i in range(n)]
    return SignedGraph(n, pos, list(extra_neg)).mirrored()


def random_nondangling(n, seed):
    rng = np.random.default_rng(seed)
    neg = set()
    for _ in range(n):
        u, v = rng.integers(n, size=2)
        if u != v and abs(u - v) not in (1, n - 1):
            neg.add((min(int(u), int(v)), max(int(u), int(v))))
    return ring_graph(n, extra_neg=sorted(neg))


def stationary_oracle(graph, seed_node, cfg):
    """Dense linear-system solution of the fixed-point equations."""
    pos, neg = semi_row_normalize(graph)
    P = pos.toarray().T
    N = neg.toarray().T
    n = graph.num_nodes
    c, b, g = cfg.restart, cfg.beta, cfg.gamma
    M = np.block([[P, b * N + (1 - g) * P],
                  [N, g * P + (1 - b) * N]])
    rhs = np.zeros(2 * n)
    rhs[seed_node] = c
    x = np.linalg.solve(np.eye(2 * n) - (1 - c) * M, rhs)
    return x[:n], x[n:]


class TestNormalization:
    def test_mixed_row_splits_half_half(self):
        g = SignedGraph(3, [(0, 1)], [(0, 2)])
        pos, neg = semi_row_normalize(g)
        assert pos[0, 1] == 0.5 and neg[0, 2] == 0.5

    def test_all_positive_graph_has_empty_negative_part(self):
        g = ring_graph(5)
        _, neg = semi_row_normalize(g)
        assert neg.nnz == 0

    def test_rows_sum_to_one_or_zero(self):
        g = random_nondangling(12, seed=0)
        pos, neg = semi_row_normalize(g)
        total = np.asarray(pos.sum(axis=1) + neg.sum(axis=1)).ravel()
        np.testing.assert_allclose(total, 1.0)

    def test_dangling_row_stays_zero(self):
        g = SignedGraph(3, [(0, 1), (2, 0)], [])
        pos, neg = semi_row_normalize(g)
        assert pos[1].nnz == 0 and neg[1].nnz == 0


class TestSrwrRank:
    def test_two_node_closed_form(self):
        # all-positive pair: r_neg is identically zero and r_pos solves
        # (I - (1-c) A~^T) r = c q
        g = SignedGraph(2, [(0, 1), (1, 0)], [])
        cfg = SrwrConfig(tol=1e-13, max_iters=5000)
        res = srwr_rank(g, 0, cfg)
        A = np.array([[0.0, 1.0], [1.0, 0.0]])
        expected = np.linalg.solve(np.eye(2) - (1 - cfg.restart) * A.T,
                                   cfg.restart * np.array([1.0, 0.0]))
        np.testing.assert_allclose(res.r_pos, expected, atol=1e-9)
        np.testing.assert_array_equal(res.r_neg, 0.0)

    def test_matches_linear_system_oracle(self):
        cfg = SrwrConfig(beta=0.7, gamma=0.3, tol=1e-13, max_iters=20000)
        for seed in range(5):
            g = random_nondangling(10, seed=seed)
            res = srwr_rank(g, seed % g.num_nodes, cfg)
            op, on = stationary_oracle(g, seed % g.num_nodes, cfg)
            np.testing.assert_allclose(res.r_pos, op, atol=1e-10)
            np.testing.assert_allclose(res.r_neg, on, atol=1e-10)

    def test_mass_conserved_at_unit_flip_params(self):
        cfg = SrwrConfig(beta=1.0, gamma=1.0)
        for seed in range(20):
            g = random_nondangling(11, seed=100 + seed)
            res = srwr_rank(g, int(seed) % 11, cfg)
            total = res.r_pos.sum() + res.r_neg.sum()
            assert abs(total - 1.0) < 1e-8, seed

    def test_mass_conserved_for_generic_params(self):
        cfg = SrwrConfig(beta=0.25, gamma=0.8)
        g = random_nondangling(13, seed=5)
        res = srwr_rank(g, 3, cfg)
        assert abs(res.r_pos.sum() + res.r_neg.sum() - 1.0) < 1e-8

    def test_mass_conserved_with_dangling_node(self):
        g = SignedGraph(4, [(0, 1), (0, 2)], [(2, 3), (1, 3)])  # 3 is dangling
        res = srwr_rank(g, 0, SrwrConfig())
        assert abs(res.r_pos.sum() + res.r_neg.sum() - 1.0) < 1e-8

    def test_all_positive_graph_keeps_negative_rank_exactly_zero(self):
        g = ring_graph(8)
        res = srwr_rank(g, 2, SrwrConfig())
        assert np.all(res.r_neg == 0.0)

    def test_masses_stay_non_negative(self):
        for seed in range(5):
            g = random_nondangling(9, seed=200 + seed)
            res = srwr_rank(g, 1, SrwrConfig(beta=0.4, gamma=0.6))
            assert res.r_pos.min() >= 0.0
            assert res.r_neg.min() >= 0.0

    def test_residuals_contract(self):
        g = random_nondangling(10, seed=9)
        res = srwr_rank(g, 0, SrwrConfig(tol=1e-11, max_iters=5000))
        assert np.all(np.diff(res.residuals) <= 1e-12)

    def test_iteration_cap_raises_with_residual(self):
        g = ring_graph(6)
        with pytest.raises(ConvergenceError) as err:
            srwr_rank(g, 0, SrwrConfig(tol=1e-15, max_iters=3))
        assert err.value.iterations == 3
        assert err.value.residual > 0

    def test_seed_out_of_range(self):
        g = ring_graph(4)
        from signwalk.errors import EdgeListError
        with pytest.raises(EdgeListError, match="out of range"):
            srwr_rank(g, 7)

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            SrwrConfig(restart=0.0)
        with pytest.raises(ConfigError):
            SrwrConfig(beta=1.5)
        with pytest.raises(ConfigError):
            SrwrConfig(neg_threshold=0.1)


class TestDiffusionMatrix:
    def test_symmetric_with_empty_diagonal(self):
        g = random_nondangling(12, seed=3)
        diff = build_diffusion_matrix(g)
        signs = diff.signs.toarray()
        np.testing.assert_array_equal(signs, signs.T)
        np.testing.assert_array_equal(np.diag(signs), 0)
        assert set(np.unique(signs)) <= {-1, 0, 1}

    def test_scores_share_pattern_and_sign(self):
        g = random_nondangling(12, seed=4)
        diff = build_diffusion_matrix(g)
        signs = diff.signs.toarray()
        scores = diff.scores.toarray()
        assert np.array_equal(signs != 0, scores != 0)
        nz = signs != 0
        assert np.all(np.sign(scores[nz]) == signs[nz])

    def test_block_structure_recovered(self):
        # with beta = gamma = 1 the attitude is exactly the walk's sign
        # product, which on a balanced graph is the block parity
        g = generate_balanced_graph(30, noise=0.0, seed=1)
        diff = build_diffusion_matrix(g, SrwrConfig(beta=1.0, gamma=1.0))
        signs = diff.signs.toarray()
        half = g.num_nodes // 2
        same = np.equal.outer(np.arange(30) < half, np.arange(30) < half)
        pos_entries = signs == 1
        neg_entries = signs == -1
        assert pos_entries.sum() > 0 and neg_entries.sum() > 0
        assert (pos_entries & same).sum() / pos_entries.sum() >= 0.9
        assert (neg_entries & ~same).sum() / neg_entries.sum() >= 0.9

    def test_deterministic(self):
        g = random_nondangling(10, seed=6)
        a = build_diffusion_matrix(g)
        b = build_diffusion_matrix(g)
        assert (a.signs != b.signs).nnz == 0
        assert (a.scores != b.scores).nnz == 0

    def test_thread_count_does_not_change_result(self):
        g = random_nondangling(10, seed=7)
        a = build_diffusion_matrix(g, threads=1)
        b = build_diffusion_matrix(g, threads=3)
        assert (a.signs != b.signs).nnz == 0
        assert np.array_equal(a.scores.toarray(), b.scores.toarray())

    def test_file_round_trip(self, tmp_path):
        g = random_nondangling(10, seed=8)
        diff = build_diffusion_matrix(g, config_hash="cafe01234567")
        path = tmp_path / "diffusion.tsv"
        save_diffusion(diff, path)
        loaded = load_diffusion(path)
        assert loaded.config_hash == "cafe01234567"
        np.testing.assert_array_equal(loaded.signs.toarray(), diff.signs.toarray())
        np.testing.assert_array_equal(loaded.scores.toarray(), diff.scores.toarray())

    def test_version_guard(self, tmp_path):
        g = random_nondangling(8, seed=9)
        path = tmp_path / "diffusion.tsv"
        save_diffusion(build_diffusion_matrix(g), path)
        text = path.read_text().replace("format_version 1", "format_version 9")
        path.write_text(text)
        with pytest.raises(ConfigError, match="version"):
            load_diffusion(path)
