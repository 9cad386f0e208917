from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..core_data.simulator import draw_study_effects
from ..core_data.transforms import corrected_logits
from ..mcmc_engine.model_types import ModelParams


@dataclass(frozen=True)
class PredictiveReplicate:
    """One posterior-predictive study on the observed-logit scale."""
    y_star_a: float
    y_star_b: float
    log_dor_star: float
    source_draw: int = -1


def simulate_logits(mu_a, mu_b, sigma_a, sigma_b, rho, n_a: int, n_b: int, rng: np.random.Generator, size):
    """
    Vectorised replicate generation: theta* ~ N(mu, Sigma), TP* ~ Bin(n_a, expit(theta*_A)),
    FP* ~ Bin(n_b, expit(theta*_B)), then corrected logits. Hyperparameters
    broadcast against `size`. Returns (y_a, y_b).
    """
    theta_a, theta_b = draw_study_effects(mu_a, mu_b, sigma_a, sigma_b, rho, rng, size=size)
    return logits_given_effects(theta_a, theta_b, n_a, n_b, rng)


def logits_given_effects(theta_a, theta_b, n_a: int, n_b: int, rng: np.random.Generator):
    """Binomial counts at fixed study effects, returned as corrected logits (y_a, y_b)."""
    tp = rng.binomial(n_a, expit(theta_a))
    fp = rng.binomial(n_b, expit(theta_b))
    y_a, y_b, _ = corrected_logits(tp, fp, n_a - tp, n_b - fp)
    return y_a, y_b


def draw_replicate(params: ModelParams, n_a: int, n_b: int, rng: np.random.Generator,
                   source_draw: int = -1) -> PredictiveReplicate:
    if n_a < 1 or n_b < 1:
        raise ValueError("n_a and n_b must be at least 1")
    y_a, y_b = simulate_logits(params.mu_a, params.mu_b, params.sigma_a, params.sigma_b, params.rho,
                               n_a, n_b, rng, size=None)
    y_a, y_b = float(y_a), float(y_b)
    return PredictiveReplicate(y_star_a=y_a, y_star_b=y_b, log_dor_star=y_a - y_b, source_draw=source_draw)
