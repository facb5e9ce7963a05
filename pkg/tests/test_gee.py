import numpy as np
import pytest

from regmap.stats import fit_poisson_its
from regmap.stats.gee import fit_gee_ar1, fit_gee_ar1_panel
from regmap.stats.panel import PanelCell, build_design

from test_glm import simulate_panel


def simulate_ar1_panel(rng, betas, alpha=0.5, n_regs=8, years=range(1995, 2025),
                       base_exposure=20000):
    """Counts whose log-rate carries an AR(1) noise process within cluster."""
    b1, b2, b3 = betas
    cells = []
    for g in range(n_regs):
        e_r = 2004 + 2 * g
        a0 = -3.0 + 0.1 * g
        eps = 0.0
        for y in years:
            eps = alpha * eps + rng.normal(0, 0.05)
            rel = y - e_r
            post = int(y >= e_r)
            n_y = base_exposure
            mu = np.exp(a0 + b1 * rel + b2 * post + b3 * rel * post + eps + np.log(n_y))
            count = rng.poisson(mu)
            cells.append(PanelCell(regulation=f"R{g}", year=y, adjusted_count=float(count),
                                   raw_distinct=count, exposure=n_y, rel=rel, post=post))
    return cells


class TestIndependenceIdentity:
    def test_matches_glm_coefficients(self):
        rng = np.random.default_rng(21)
        panel = simulate_panel(rng, (-0.01, 0.05, -0.03))
        glm = fit_poisson_its(panel)
        gee = fit_gee_ar1_panel(panel, corr="independence")
        assert np.max(np.abs(glm.coef - gee.coef)) < 1e-6


class TestAr1Recovery:
    def test_recovery_within_3_robust_se(self):
        betas = (-0.01, 0.06, -0.04)
        for seed in (100, 102, 103, 104, 105):
            rng = np.random.default_rng(seed)
            panel = simulate_ar1_panel(rng, betas, n_regs=12)
            fit = fit_gee_ar1_panel(panel, corr="ar1")
            idx = {n: i for i, n in enumerate(fit.names)}
            se = fit.se(robust=True)
            for name, true in zip(("rel", "post", "rel_post"), betas):
                i = idx[name]
                assert abs(fit.coef[i] - true) <= 3 * se[i], (seed, name)

    def test_same_mean_structure_as_glm(self):
        rng = np.random.default_rng(5)
        panel = simulate_ar1_panel(rng, (-0.01, 0.05, -0.02), alpha=0.3, n_regs=4)
        gee = fit_gee_ar1_panel(panel)
        assert gee.converged and gee.n_clusters == 4
        assert set(gee.names) == set(fit_poisson_its(panel).names)


class TestGuards:
    def test_requires_clusters(self):
        X = np.ones((5, 1))
        with pytest.raises(ValueError):
            fit_gee_ar1(X, np.ones(5))

    def test_alpha_clamped_with_warning(self):
        # Two long identical clusters with an extreme common trend push the
        # lag-1 moment estimate toward 1.
        n = 40
        X = np.ones((2 * n, 1))
        t = np.tile(np.arange(n), 2)
        y = np.exp(3 + 1.5 * np.sin(t / 6.0))
        clusters = np.repeat([0, 1], n)
        with pytest.warns(UserWarning, match="clamped"):
            fit_gee_ar1(X, y, clusters=clusters, corr="ar1", max_iter=300)
