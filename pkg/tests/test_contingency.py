import numpy as np
import pytest
from scipy import stats as sps

from regmap.stats import bh_fdr, chi2_suite


def brute_force_bh(p, alpha=0.05):
    """Step-up definition applied literally."""
    m = len(p)
    order = sorted(range(m), key=lambda i: p[i])
    adj = [None] * m
    prev = 1.0
    for rank in range(m, 0, -1):
        i = order[rank - 1]
        val = min(p[i] * m / rank, prev)
        adj[i] = min(val, 1.0)
        prev = adj[i]
    return adj


class TestBhFdr:
    def test_single_p(self):
        adj, sig = bh_fdr([0.03])
        assert adj[0] == 0.03 and sig[0]

    def test_hand_example(self):
        adj, _ = bh_fdr([0.01, 0.02, 0.03, 0.04])
        assert np.allclose(adj, [0.04, 0.04, 0.04, 0.04])

    def test_1000_random_vectors_match_brute_force(self):
        rng = np.random.default_rng(12)
        for _ in range(1000):
            p = rng.uniform(size=rng.integers(1, 20)).tolist()
            adj, _ = bh_fdr(p)
            assert np.allclose(adj, brute_force_bh(p))

    def test_monotone_significance_sets(self):
        rng = np.random.default_rng(4)
        p = rng.uniform(size=50)
        _, sig_05 = bh_fdr(p, alpha=0.05)
        _, sig_01 = bh_fdr(p, alpha=0.01)
        assert set(np.where(sig_01)[0]) <= set(np.where(sig_05)[0])

    def test_empty_family(self):
        adj, sig = bh_fdr([])
        assert adj.size == 0 and sig.size == 0

    def test_domain(self):
        with pytest.raises(ValueError):
            bh_fdr([1.2])


class TestChi2Suite:
    def test_diagonal_2x2(self):
        res = chi2_suite([[10, 0], [0, 10]])
        assert res.chi2 == pytest.approx(20.0)
        assert res.cramers_v == pytest.approx(1.0)
        assert np.allclose(np.abs(res.residuals), 2.2360, atol=1e-4)
        assert np.all(res.expected == 5.0)
        assert res.df == 1

    def test_independent_outer_product(self):
        rows = np.array([2.0, 3.0, 5.0])
        cols = np.array([1.0, 4.0, 2.0, 3.0])
        table = np.outer(rows, cols)
        res = chi2_suite(table)
        assert res.chi2 < 1e-9
        assert res.cramers_v < 1e-5
        assert np.max(np.abs(res.residuals)) < 1e-6

    def test_margins_preserved(self):
        rng = np.random.default_rng(8)
        O = rng.integers(0, 30, size=(5, 4)).astype(float) + 1
        res = chi2_suite(O)
        assert res.expected.sum() == pytest.approx(res.observed.sum())
        assert np.allclose(res.expected.sum(axis=1), res.observed.sum(axis=1))
        assert np.allclose(res.expected.sum(axis=0), res.observed.sum(axis=0))

    def test_matches_scipy_chi2_contingency(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            O = rng.integers(1, 40, size=(4, 6)).astype(float)
            res = chi2_suite(O)
            chi2, p, df, E = sps.chi2_contingency(O, correction=False)
            assert res.chi2 == pytest.approx(chi2)
            assert res.p_value == pytest.approx(p)
            assert res.df == df
            assert np.allclose(res.expected, E)

    def test_constant_rescaling_property(self):
        O = np.array([[12.0, 3.0, 7.0], [5.0, 9.0, 4.0]])
        base = chi2_suite(O)
        scaled = chi2_suite(2.5 * O)
        assert scaled.cramers_v == pytest.approx(base.cramers_v)
        assert scaled.chi2 == pytest.approx(2.5 * base.chi2)
        assert np.all(np.sign(scaled.residuals) == np.sign(base.residuals))

    def test_small_expected_excluded_from_family(self):
        O = np.array([[50.0, 1.0, 40.0], [45.0, 2.0, 55.0]])
        res = chi2_suite(O)
        assert not res.tested_mask[:, 1].any()  # E < 5 column
        assert np.isnan(res.adjusted_p[~res.tested_mask]).all()
        assert not res.significant[~res.tested_mask].any()

    def test_zero_margin_row_excluded(self):
        O = np.array([[10.0, 5.0], [0.0, 0.0], [3.0, 8.0]])
        res = chi2_suite(O, row_labels=["a", "b", "c"])
        assert res.dropped_rows == ["b"]
        assert res.observed.shape == (2, 2)

    def test_monte_carlo_agrees_with_asymptotic(self):
        O = np.array([[30.0, 10.0], [12.0, 28.0]])
        res = chi2_suite(O, monte_carlo=True, n_tables=4000, seed=5)
        assert res.monte_carlo_p is not None
        assert res.monte_carlo_p == pytest.approx(res.p_value, abs=0.02)
        # Fixed seed -> reproducible.
        res2 = chi2_suite(O, monte_carlo=True, n_tables=4000, seed=5)
        assert res2.monte_carlo_p == res.monte_carlo_p

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            chi2_suite([[1.0, -2.0], [3.0, 4.0]])
        with pytest.raises(ValueError):
            chi2_suite([[1.0, 2.0]])
