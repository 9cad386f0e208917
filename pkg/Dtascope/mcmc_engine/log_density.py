import math

import numpy as np
from scipy.special import gammaln

from ..core_data.study_records import Dataset
from .model_types import ModelParams, PriorSpec, RandomEffects

LOG_2PI = math.log(2 * math.pi)


def softplus(x):
    """log(1 + exp(x)) without overflow."""
    return np.logaddexp(0.0, x)


def binomial_kernel(successes, trials, theta):
    """Binomial log-likelihood in logit parameterisation, without the combinatorial constant."""
    return successes * theta - trials * softplus(theta)


def log_binomial_coefficient(successes, trials):
    return gammaln(trials + 1.0) - gammaln(successes + 1.0) - gammaln(trials - successes + 1.0)


def bivariate_normal_logpdf(theta_a, theta_b, mu_a, mu_b, sigma_a, sigma_b, rho):
    """Elementwise log N((theta_a, theta_b) | mu, Sigma)."""
    z_a = (theta_a - mu_a) / sigma_a
    z_b = (theta_b - mu_b) / sigma_b
    one_minus = 1.0 - rho * rho
    quad = (z_a * z_a - 2.0 * rho * z_a * z_b + z_b * z_b) / one_minus
    return -LOG_2PI - np.log(sigma_a) - np.log(sigma_b) - 0.5 * np.log(one_minus) - 0.5 * quad


def log_joint(dataset: Dataset, params: ModelParams, effects: RandomEffects, prior: PriorSpec) -> float:
    """
    log p(TP, FP, theta, xi): binomial likelihood (with constants), bivariate
    normal random effects and the prior. -inf outside the prior support.
    """
    if len(effects) != len(dataset):
        raise ValueError(f"{len(effects)} random-effect pairs for {len(dataset)} studies")

    log_prior = prior.log_density(params)
    if not math.isfinite(log_prior) or not -1.0 < params.rho < 1.0:
        return -math.inf

    counts = dataset.count_arrays()
    theta_a = effects.theta[:, 0]
    theta_b = effects.theta[:, 1]
    log_lik = (
        binomial_kernel(counts["tp"], counts["n_a"], theta_a)
        + binomial_kernel(counts["fp"], counts["n_b"], theta_b)
        + log_binomial_coefficient(counts["tp"], counts["n_a"])
        + log_binomial_coefficient(counts["fp"], counts["n_b"])
    )
    log_re = bivariate_normal_logpdf(
        theta_a, theta_b, params.mu_a, params.mu_b, params.sigma_a, params.sigma_b, params.rho
    )
    return float(np.sum(log_lik) + np.sum(log_re) + log_prior)
