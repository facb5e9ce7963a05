"""Poisson GLM with log link and exposure offset, fit by IRLS.

The interrupted time-series model is

    log E[Y] = X @ beta + offset,

with offset = log(exposure). Outcomes may be non-integer (counts scaled by
the audit multiplier); the estimating equations are unchanged, so the fit
is quasi-likelihood IRLS. Cluster-robust (CR0 sandwich) covariance is
computed over a caller-supplied grouping, typically the regulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

MAX_ITER = 100
DEVIANCE_RTOL = 1e-10


class ConvergenceError(RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


def poisson_deviance(y, mu):
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(y > 0, y * np.log(y / mu), 0.0)
    return 2.0 * np.sum(term - (y - mu))


def poisson_loglik(y, mu):
    # Up to the y! term, which does not involve beta.
    return float(np.sum(y * np.log(mu) - mu))


def _check_rank(X, names):
    r, p = np.linalg.matrix_rank(X), X.shape[1]
    if r < p:
        _, R, piv = linalg.qr(X, mode="economic", pivoting=True)
        bad = [names[j] for j in piv[r:]] if names else list(piv[r:])
        raise np.linalg.LinAlgError(f"design matrix rank deficient; collinear columns: {bad}")


@dataclass
class FitResult:
    names: list
    coef: np.ndarray
    cov_model: np.ndarray
    cov_robust: np.ndarray | None
    deviance: float
    dispersion: float
    n_iter: int
    converged: bool
    n_clusters: int | None = None

    def se(self, robust: bool = True) -> np.ndarray:
        cov = self.cov_robust if (robust and self.cov_robust is not None) else self.cov_model
        # Floating noise can leave tiny negative diagonals in a near-zero
        # sandwich (e.g. a single perfectly-fit cluster).
        return np.sqrt(np.clip(np.diag(cov), 0.0, None))

    def rate_ratios(self, robust: bool = True, z: float = 1.96):
        """Table of (name, RR, CI low, CI high) via exponentiation."""
        se = self.se(robust)
        return [
            (n, float(np.exp(b)), float(np.exp(b - z * s)), float(np.exp(b + z * s)))
            for n, b, s in zip(self.names, self.coef, se)
        ]


def fit_poisson_glm(X, y, offset=None, clusters=None, names=None,
                    max_iter=MAX_ITER, rtol=DEVIANCE_RTOL) -> FitResult:
    """IRLS fit of a Poisson log-link GLM with offset.

    clusters: optional length-n array of group ids; when given, the CR0
    cluster-robust sandwich covariance is attached.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    offset = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)
    names = list(names) if names else [f"x{j}" for j in range(p)]
    _check_rank(X, names)

    beta = np.zeros(p)
    # Start the intercept-free linear predictor at the mean rate.
    mean_rate = max(np.mean(y) / np.mean(np.exp(offset)), 1e-8)
    eta = np.full(n, np.log(mean_rate)) + offset
    mu = np.exp(eta)
    dev = poisson_deviance(y, mu)
    trace = [dev]
    converged = False
    for it in range(1, max_iter + 1):
        w = mu
        z = (eta - offset) + (y - mu) / mu
        WX = X * w[:, None]
        beta = linalg.solve(X.T @ WX, X.T @ (w * z), assume_a="pos")
        eta = X @ beta + offset
        mu = np.exp(np.clip(eta, -700, 700))
        new_dev = poisson_deviance(y, mu)
        trace.append(new_dev)
        if abs(new_dev - dev) <= rtol * (abs(dev) + 0.1):
            dev = new_dev
            converged = True
            break
        dev = new_dev
    if not converged:
        raise ConvergenceError(f"IRLS did not converge in {max_iter} iterations", trace)

    info = X.T @ (X * mu[:, None])
    cov_model = linalg.inv(info)
    pearson = np.sum((y - mu) ** 2 / mu)
    dof = max(n - p, 1)
    dispersion = pearson / dof

    cov_robust = None
    n_clusters = None
    if clusters is not None:
        clusters = np.asarray(clusters)
        resid = y - mu
        meat = np.zeros((p, p))
        groups = np.unique(clusters)
        for g in groups:
            sg = X[clusters == g].T @ resid[clusters == g]
            meat += np.outer(sg, sg)
        cov_robust = cov_model @ meat @ cov_model
        n_clusters = len(groups)

    return FitResult(
        names=names, coef=beta, cov_model=cov_model, cov_robust=cov_robust,
        deviance=float(dev), dispersion=float(dispersion), n_iter=it,
        converged=converged, n_clusters=n_clusters,
    )


def fit_poisson_its(panel) -> FitResult:
    """Fit the segmented ITS model on a panel of cells.

    Design: regulation fixed effects + rel + post + rel*post, offset
    log(exposure), clusters by regulation. With 13 clusters the CR0
    sandwich is anti-conservative; results carry n_clusters so reports can
    note the small-cluster caution.
    """
    from .panel import build_design

    X, y, offset, clusters, names = build_design(panel)
    return fit_poisson_glm(X, y, offset=offset, clusters=clusters, names=names)


def derived_effects(fit: FitResult, z: float = 1.96) -> dict:
    """Level/slope rate ratios and the five-year post-slope implication."""
    if not fit.converged:
        raise ConvergenceError("cannot derive effects from a non-converged fit")
    idx = {n: i for i, n in enumerate(fit.names)}
    b = fit.coef
    se = fit.se(robust=True)
    i1, i2, i3 = idx["rel"], idx["post"], idx["rel_post"]
    out = {
        "pre_slope_rr": float(np.exp(b[i1])),
        "pre_slope_ci": (float(np.exp(b[i1] - z * se[i1])), float(np.exp(b[i1] + z * se[i1]))),
        "level_change_rr": float(np.exp(b[i2])),
        "level_change_ci": (float(np.exp(b[i2] - z * se[i2])), float(np.exp(b[i2] + z * se[i2]))),
        "post_slope_rr": float(np.exp(b[i1] + b[i3])),
        "five_year_post": float(np.exp(5.0 * (b[i1] + b[i3]))),
    }
    return out
