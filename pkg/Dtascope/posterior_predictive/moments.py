"""
Predictive moments on the (y_A, y_B) and log-DOR scales.

`loo_predictive_moments` marginalises over a leave-one-out posterior and feeds
the standardised residuals. `moments_given_effects` pools replicates drawn at
a study's own posterior effects and feeds the Bayesian p-values.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..exceptions import InsufficientReplicatesError
from ..mcmc_engine.model_types import ModelParams, PosteriorChain
from ..mcmc_engine.pooled import pooled_draws
from .replicates import logits_given_effects, simulate_logits

logger = logging.getLogger(__name__)

MIN_LOO_REPLICATES = 100
MIN_INNER_REPS = 50


@dataclass(frozen=True)
class PredictiveMoments:
    mean: np.ndarray
    cov: np.ndarray
    mean_log_dor: float
    var_log_dor: float
    n_replicates: int

    @property
    def var_a(self) -> float:
        return float(self.cov[0, 0])

    @property
    def var_b(self) -> float:
        return float(self.cov[1, 1])

    @classmethod
    def from_samples(cls, y_a: np.ndarray, y_b: np.ndarray) -> "PredictiveMoments":
        y_a = np.ravel(y_a)
        y_b = np.ravel(y_b)
        log_dor = y_a - y_b
        cov = np.cov(np.vstack([y_a, y_b]), ddof=1)
        return cls(
            mean=np.array([y_a.mean(), y_b.mean()]),
            cov=cov,
            mean_log_dor=float(log_dor.mean()),
            var_log_dor=float(log_dor.var(ddof=1)),
            n_replicates=int(y_a.size),
        )

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "mean_log_dor": self.mean_log_dor,
            "var_log_dor": self.var_log_dor,
            "n_replicates": self.n_replicates,
        }


def loo_predictive_moments(chains: Sequence[PosteriorChain], n_a: int, n_b: int, reps_per_draw: int = 4,
                           rng: Optional[np.random.Generator] = None) -> PredictiveMoments:
    """Moments of a new study of size (n_a, n_b) under the pooled posterior of `chains`."""
    if reps_per_draw < 1:
        raise ValueError("reps_per_draw must be at least 1")
    xi = pooled_draws(chains)
    total = xi.shape[0] * reps_per_draw
    if total < MIN_LOO_REPLICATES:
        raise InsufficientReplicatesError(
            f"{total} predictive replicates; at least {MIN_LOO_REPLICATES} are required"
        )
    rng = rng if rng is not None else np.random.default_rng()
    xi = np.repeat(xi, reps_per_draw, axis=0)
    y_a, y_b = simulate_logits(xi[:, 0], xi[:, 1], xi[:, 2], xi[:, 3], xi[:, 4], n_a, n_b, rng, size=total)
    return PredictiveMoments.from_samples(y_a, y_b)


def conditional_moments_given_xi(params: ModelParams, n_a: int, n_b: int, inner_reps: int,
                                 rng: np.random.Generator) -> PredictiveMoments:
    """E(y | xi) and Var(y | xi) by `inner_reps` replicates at fixed xi."""
    if inner_reps < MIN_INNER_REPS:
        raise ValueError(f"inner_reps must be at least {MIN_INNER_REPS}")
    y_a, y_b = simulate_logits(params.mu_a, params.mu_b, params.sigma_a, params.sigma_b, params.rho,
                               n_a, n_b, rng, size=inner_reps)
    return PredictiveMoments.from_samples(y_a, y_b)


def moments_given_effects(theta_a: np.ndarray, theta_b: np.ndarray, n_a: int, n_b: int, inner_reps: int,
                          rng: np.random.Generator) -> PredictiveMoments:
    """
    Moments of the study's own predictive distribution: `inner_reps` binomial
    replicates at each posterior draw of its effects, pooled over all draws.
    """
    if inner_reps < MIN_INNER_REPS:
        raise ValueError(f"inner_reps must be at least {MIN_INNER_REPS}")
    theta_a = np.repeat(np.ravel(theta_a), inner_reps)
    theta_b = np.repeat(np.ravel(theta_b), inner_reps)
    y_a, y_b = logits_given_effects(theta_a, theta_b, n_a, n_b, rng)
    return PredictiveMoments.from_samples(y_a, y_b)
