from typing import Sequence

import numpy as np
from scipy.special import expit

from .model_types import PARAM_NAMES, Estimate, ModelParams, PooledEstimates, PosteriorChain


def pooled_draws(chains: Sequence[PosteriorChain]) -> np.ndarray:
    """All retained xi draws, chains concatenated in chain_index order. Shape (draws, 5)."""
    chains = sorted(chains, key=lambda c: c.chain_index)
    if not chains or sum(c.n_draws for c in chains) == 0:
        raise ValueError("no posterior draws to pool")
    return np.concatenate([c.xi for c in chains], axis=0)


def posterior_mean_params(chains: Sequence[PosteriorChain]) -> ModelParams:
    """Plug-in xi: the posterior mean of every hyperparameter."""
    return ModelParams.from_vector(pooled_draws(chains).mean(axis=0))


def _interval(values: np.ndarray, point: float) -> Estimate:
    lower, upper = np.quantile(values, [0.025, 0.975])
    return Estimate(value=float(point), lower=float(lower), upper=float(upper))


def _ratios(eta_a, eta_b):
    lr_pos = eta_a / eta_b
    lr_neg = (1.0 - eta_a) / (1.0 - eta_b)
    return lr_pos, lr_neg, lr_pos / lr_neg


def pooled_estimates(chains: Sequence[PosteriorChain]) -> PooledEstimates:
    """
    Pooled sensitivity, FPR, DOR and likelihood ratios.

    Point values are transforms of the posterior means of mu_a and mu_b;
    intervals are 2.5/97.5% quantiles of the same transforms per draw.
    """
    draws = pooled_draws(chains)
    mu_a = draws[:, PARAM_NAMES.index("mu_a")]
    mu_b = draws[:, PARAM_NAMES.index("mu_b")]
    mu_a_mean = float(mu_a.mean())
    mu_b_mean = float(mu_b.mean())

    eta_a, eta_b = float(expit(mu_a_mean)), float(expit(mu_b_mean))
    lr_pos, lr_neg, dor = _ratios(eta_a, eta_b)

    draw_eta_a, draw_eta_b = expit(mu_a), expit(mu_b)
    draw_lr_pos, draw_lr_neg, draw_dor = _ratios(draw_eta_a, draw_eta_b)

    return PooledEstimates(
        eta_a=_interval(draw_eta_a, eta_a),
        eta_b=_interval(draw_eta_b, eta_b),
        dor=_interval(draw_dor, dor),
        lr_pos=_interval(draw_lr_pos, lr_pos),
        lr_neg=_interval(draw_lr_neg, lr_neg),
        mu_a_mean=mu_a_mean,
        mu_b_mean=mu_b_mean,
    )
