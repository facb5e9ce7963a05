"""Chi-square association suite for the regulation x RDC table.

Omnibus chi-square with Cramer's V, standardized residuals, per-cell
two-sided p-values BH-FDR adjusted over the family of cells with expected
count >= 5, and an optional margin-preserving Monte-Carlo p-value used
when asymptotic adequacy fails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps


@dataclass
class ContingencyResult:
    observed: np.ndarray
    expected: np.ndarray
    row_labels: list
    col_labels: list
    chi2: float
    df: int
    p_value: float
    cramers_v: float
    residuals: np.ndarray  # z_rc = (O - E) / sqrt(E)
    cell_p: np.ndarray  # two-sided normal p per cell
    tested_mask: np.ndarray  # E_rc >= 5
    adjusted_p: np.ndarray  # BH over tested cells; NaN outside the family
    significant: np.ndarray  # adjusted p <= alpha, within the family
    dropped_rows: list
    dropped_cols: list
    monte_carlo_p: float | None = None
    monte_carlo_seed: int | None = None


def bh_fdr(pvalues, alpha: float = 0.05):
    """Benjamini-Hochberg step-up adjustment.

    Returns (adjusted p list, significance flags). Adjusted values are the
    usual monotone step-up quantities: p_(i) * m / i, cumulative-minimized
    from the largest rank down.
    """
    p = np.asarray(pvalues, dtype=float)
    if p.size == 0:
        return np.array([]), np.array([], dtype=bool)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    ranked = p[order] * m / np.arange(1, m + 1)
    adj_sorted = np.minimum.accumulate(ranked[::-1])[::-1]
    adj = np.empty(m)
    adj[order] = np.minimum(adj_sorted, 1.0)
    return adj, adj <= alpha


def _mc_pvalue(observed: np.ndarray, chi2_obs: float, n_tables: int, seed: int) -> float:
    """Monte-Carlo p from margin-preserving resampling (rounded counts)."""
    O = np.round(observed).astype(int)
    rows = np.repeat(np.arange(O.shape[0]), O.sum(axis=1))
    cols = np.repeat(np.arange(O.shape[1]), O.sum(axis=0))
    rng = np.random.default_rng(seed)
    N = rows.size
    row_marg = O.sum(axis=1)
    col_marg = O.sum(axis=0)
    E = np.outer(row_marg, col_marg) / N
    hits = 0
    for _ in range(n_tables):
        perm = rng.permutation(cols)
        table = np.zeros_like(O)
        np.add.at(table, (rows, perm), 1)
        stat = np.sum((table - E) ** 2 / E)
        if stat >= chi2_obs - 1e-12:
            hits += 1
    return (hits + 1) / (n_tables + 1)


def chi2_suite(observed, row_labels=None, col_labels=None, alpha: float = 0.05,
               monte_carlo: bool | None = None, n_tables: int = 10_000,
               seed: int = 20_240_901) -> ContingencyResult:
    """Run the full association suite on a nonnegative R x C table.

    Rows/columns with a zero margin are excluded (recorded on the result)
    before testing. ``monte_carlo=None`` runs the resampled p-value only
    when the usual adequacy rule fails (any E < 1 or >20% of cells E < 5).
    """
    O = np.asarray(observed, dtype=float)
    if O.ndim != 2 or np.any(O < 0):
        raise ValueError("observed must be a nonnegative 2-D table")
    R0, C0 = O.shape
    row_labels = list(row_labels) if row_labels is not None else list(range(R0))
    col_labels = list(col_labels) if col_labels is not None else list(range(C0))

    keep_r = O.sum(axis=1) > 0
    keep_c = O.sum(axis=0) > 0
    dropped_rows = [row_labels[i] for i in range(R0) if not keep_r[i]]
    dropped_cols = [col_labels[j] for j in range(C0) if not keep_c[j]]
    O = O[np.ix_(keep_r, keep_c)]
    row_labels = [l for l, k in zip(row_labels, keep_r) if k]
    col_labels = [l for l, k in zip(col_labels, keep_c) if k]
    R, C = O.shape
    if R < 2 or C < 2:
        raise ValueError("need at least 2 rows and 2 columns with positive margins")

    N = O.sum()
    E = np.outer(O.sum(axis=1), O.sum(axis=0)) / N
    chi2 = float(np.sum((O - E) ** 2 / E))
    df = (R - 1) * (C - 1)
    p_value = float(sps.chi2.sf(chi2, df))
    cramers_v = float(np.sqrt(chi2 / (N * min(R - 1, C - 1))))
    z = (O - E) / np.sqrt(E)
    cell_p = 2.0 * sps.norm.sf(np.abs(z))

    tested = E >= 5.0
    adjusted = np.full_like(cell_p, np.nan)
    significant = np.zeros_like(tested)
    if tested.any():
        adj, sig = bh_fdr(cell_p[tested], alpha=alpha)
        adjusted[tested] = adj
        significant[tested] = sig

    inadequate = np.any(E < 1.0) or np.mean(E < 5.0) > 0.2
    run_mc = monte_carlo if monte_carlo is not None else inadequate
    mc_p = _mc_pvalue(O, chi2, n_tables, seed) if run_mc else None

    return ContingencyResult(
        observed=O, expected=E, row_labels=row_labels, col_labels=col_labels,
        chi2=chi2, df=df, p_value=p_value, cramers_v=cramers_v,
        residuals=z, cell_p=cell_p, tested_mask=tested, adjusted_p=adjusted,
        significant=significant, dropped_rows=dropped_rows, dropped_cols=dropped_cols,
        monte_carlo_p=mc_p, monte_carlo_seed=seed if run_mc else None,
    )
