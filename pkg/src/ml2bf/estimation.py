"""Posterior-mean coefficient estimators, model averaging, predictive loss."""

from dataclasses import dataclass

import numpy as np

from .bayesfactors import QuadratureConfig, zs_posterior_shrinkage
from .regression import SuffStats

__all__ = [
    "Estimate",
    "shrinkage_factor_ml2",
    "posterior_mean_ml2",
    "posterior_mean_gprior",
    "posterior_mean_zs",
    "bma_estimate",
    "predictive_loss",
]


@dataclass(frozen=True)
class Estimate:
    """Coefficient estimate padded to the full candidate dimension.

    Entries outside ``model`` are zero.
    """

    beta: np.ndarray
    model: tuple
    method: str

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(beta)):
            raise ValueError("estimate has non-finite entries")
        outside = np.ones(beta.shape[0], dtype=bool)
        for j in self.model:
            outside[j] = False
        if np.any(beta[outside] != 0.0):
            raise ValueError("nonzero coefficients outside the model")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "model", tuple(self.model))


def shrinkage_factor_ml2(stats: SuffStats) -> float:
    """Posterior-mean shrinkage under the constrained type II ML prior.

    Equals n/(n+1) up to the evidence threshold r2 = (n+1)/(2n-p0) and
    ``1 - (1-r2)/((n-p0-1) r2)`` above it; continuous at the threshold, and
    tends to 1 as r2 tends to 1.
    """
    n, p0 = stats.n, stats.p0
    if stats.n <= stats.p0 + stats.p:
        raise ValueError("insufficient sample size")
    r2 = stats.r2
    if r2 <= (n + 1) / (2 * n - p0):
        return n / (n + 1.0)
    return 1.0 - (1.0 - r2) / ((n - p0 - 1) * r2)


def posterior_mean_ml2(stats: SuffStats) -> np.ndarray:
    """Posterior mean of the coefficients under the type II ML prior."""
    if stats.p == 0:
        return np.zeros(0)
    return shrinkage_factor_ml2(stats) * stats.beta_hat


def posterior_mean_gprior(stats: SuffStats, g: float) -> np.ndarray:
    """Posterior mean under a fixed-g prior: g/(1+g) times least squares."""
    if not g > 0:
        raise ValueError("g must be positive")
    return (g / (1.0 + g)) * stats.beta_hat


def posterior_mean_zs(stats: SuffStats, cfg: QuadratureConfig | None = None) -> np.ndarray:
    """Posterior mean under the Zellner-Siow prior (mixture-weighted shrinkage)."""
    if stats.p == 0:
        return np.zeros(0)
    return zs_posterior_shrinkage(stats, cfg) * stats.beta_hat


def bma_estimate(posterior, per_model_estimates) -> np.ndarray:
    """Probability-weighted average of zero-padded per-model estimates."""
    estimates = list(per_model_estimates)
    if len(estimates) != len(posterior.models):
        raise ValueError("need one estimate per model")
    if np.any(np.isposinf(posterior.log_evidence)):
        raise ValueError(
            "cannot model-average with an overwhelming-evidence (+inf) marker present"
        )
    out = None
    for prob, est in zip(posterior.posterior_prob, estimates):
        beta = est.beta if isinstance(est, Estimate) else np.asarray(est, dtype=np.float64)
        out = prob * beta if out is None else out + prob * beta
    return out


def predictive_loss(x, beta_true, delta) -> float:
    """Squared prediction loss ||X beta - X delta||^2."""
    x = np.asarray(x, dtype=np.float64)
    beta_true = np.asarray(beta_true, dtype=np.float64).reshape(-1)
    delta = np.asarray(delta, dtype=np.float64).reshape(-1)
    if beta_true.shape != delta.shape or x.shape[1] != beta_true.shape[0]:
        raise ValueError("dimension mismatch between design and coefficient vectors")
    diff = x @ (beta_true - delta)
    return float(diff @ diff)
