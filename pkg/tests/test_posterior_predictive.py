import numpy as np
import pytest

from Dtascope.exceptions import InsufficientReplicatesError
from Dtascope.mcmc_engine.model_types import ModelParams, PosteriorChain
from Dtascope.posterior_predictive.moments import (
    PredictiveMoments,
    conditional_moments_given_xi,
    loo_predictive_moments,
    moments_given_effects,
)
from Dtascope.posterior_predictive.replicates import draw_replicate, logits_given_effects, simulate_logits


def _constant_chain(xi, draws):
    return PosteriorChain(xi=np.tile(xi, (draws, 1)), theta=None, acceptance_rates={}, chain_index=0)


def test_degenerate_replicate_sits_at_mean():
    params = ModelParams(mu_a=0.0, mu_b=0.0, sigma_a=1e-9, sigma_b=1e-9, rho=0.0)
    replicate = draw_replicate(params, 1_000_000, 1_000_000, np.random.default_rng(0))
    assert replicate.y_star_a == pytest.approx(0.0, abs=0.01)
    assert replicate.y_star_b == pytest.approx(0.0, abs=0.01)
    assert replicate.log_dor_star == pytest.approx(replicate.y_star_a - replicate.y_star_b)


def test_replicate_mean_on_logit_scale():
    y_a, _ = simulate_logits(2.0, -1.0, 0.5, 0.5, 0.0, 100, 100, np.random.default_rng(1), size=100_000)
    assert y_a.mean() == pytest.approx(2.0, abs=0.02)


def test_replicate_needs_subjects():
    params = ModelParams(mu_a=0.0, mu_b=0.0, sigma_a=1.0, sigma_b=1.0, rho=0.0)
    with pytest.raises(ValueError):
        draw_replicate(params, 0, 10, np.random.default_rng(0))


def test_from_samples_matches_numpy():
    rng = np.random.default_rng(2)
    y_a, y_b = rng.normal(size=500), rng.normal(size=500)
    moments = PredictiveMoments.from_samples(y_a, y_b)
    assert moments.mean == pytest.approx([y_a.mean(), y_b.mean()])
    assert moments.cov == pytest.approx(np.cov(y_a, y_b))
    assert moments.var_log_dor == pytest.approx(np.var(y_a - y_b, ddof=1))
    assert moments.n_replicates == 500


def test_loo_moments_need_enough_replicates():
    chain = _constant_chain([0.0, 0.0, 1.0, 1.0, 0.0], draws=10)
    with pytest.raises(InsufficientReplicatesError):
        loo_predictive_moments([chain], 50, 50, reps_per_draw=4)


def test_loo_moments_of_large_studies_follow_random_effects():
    chain = _constant_chain([1.0, -1.0, 0.5, 0.4, 0.5], draws=5000)
    moments = loo_predictive_moments([chain], 10_000, 10_000, reps_per_draw=4, rng=np.random.default_rng(3))
    assert moments.n_replicates == 20_000
    assert moments.mean == pytest.approx([1.0, -1.0], abs=0.02)
    assert moments.var_a == pytest.approx(0.25, rel=0.05)
    assert moments.var_b == pytest.approx(0.16, rel=0.05)
    assert moments.cov[0, 1] == pytest.approx(0.5 * 0.5 * 0.4, abs=0.01)


def test_conditional_moments_minimum_inner_reps():
    params = ModelParams(mu_a=0.0, mu_b=0.0, sigma_a=1.0, sigma_b=1.0, rho=0.0)
    with pytest.raises(ValueError):
        conditional_moments_given_xi(params, 10, 10, 20, np.random.default_rng(0))


def test_logits_at_fixed_effects_ignore_hyperparameters():
    theta_a = np.full(50_000, 1.0)
    theta_b = np.full(50_000, -2.0)
    y_a, y_b = logits_given_effects(theta_a, theta_b, 5000, 5000, np.random.default_rng(5))
    assert y_a.mean() == pytest.approx(1.0, abs=0.01)
    assert y_b.mean() == pytest.approx(-2.0, abs=0.01)


def test_moments_given_effects_pool_all_draws():
    theta_a = np.array([0.0, 1.0])
    theta_b = np.array([-1.0, -1.0])
    moments = moments_given_effects(theta_a, theta_b, 10_000, 10_000, 5000, np.random.default_rng(6))
    assert moments.n_replicates == 10_000
    assert moments.mean == pytest.approx([0.5, -1.0], abs=0.01)
    # spread comes from the two effect values, not from binomial noise
    assert moments.var_a == pytest.approx(0.25, rel=0.05)
    assert moments.cov[0, 1] == pytest.approx(0.0, abs=0.01)


def test_moments_given_effects_minimum_inner_reps():
    with pytest.raises(ValueError):
        moments_given_effects(np.zeros(3), np.zeros(3), 10, 10, 20, np.random.default_rng(0))
