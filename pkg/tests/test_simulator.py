import numpy as np
import pytest
from scipy.special import logit

from Dtascope.core_data.simulator import draw_study_effects, simulate_dataset
from Dtascope.mcmc_engine.model_types import ModelParams


def test_simulation_is_deterministic():
    params = ModelParams(mu_a=1.0, mu_b=-1.0, sigma_a=0.5, sigma_b=0.5, rho=0.2)
    sizes = [(50, 70)] * 6
    first = simulate_dataset(params, sizes, seed=42)
    second = simulate_dataset(params, sizes, seed=42)
    assert first.studies == second.studies
    assert simulate_dataset(params, sizes, seed=43).studies != first.studies


def test_margins_follow_sizes():
    params = ModelParams(mu_a=0.0, mu_b=0.0, sigma_a=1.0, sigma_b=1.0, rho=0.0)
    dataset = simulate_dataset(params, [(10, 20), (30, 40), (5, 6)], seed=1)
    assert [(s.n_a, s.n_b) for s in dataset] == [(10, 20), (30, 40), (5, 6)]
    assert dataset.ids == [1, 2, 3]


@pytest.mark.parametrize("sizes", [[], [(10, 10), (10, 10)], [(0, 10)] * 3, [(10, 0)] * 3])
def test_invalid_sizes(sizes):
    params = ModelParams(mu_a=0.0, mu_b=0.0, sigma_a=1.0, sigma_b=1.0, rho=0.0)
    with pytest.raises(ValueError):
        simulate_dataset(params, sizes, seed=1)


def test_degenerate_effects_give_mean_proportion():
    params = ModelParams(mu_a=0.0, mu_b=0.0, sigma_a=1e-9, sigma_b=1e-9, rho=0.0)
    dataset = simulate_dataset(params, [(1_000_000, 1_000_000)] * 3, seed=5)
    assert dataset.studies[0].tp / 1_000_000 == pytest.approx(0.5, abs=0.002)


def test_study_logits_average_to_mu():
    params = ModelParams(mu_a=2.0, mu_b=-1.0, sigma_a=1.0, sigma_b=0.5, rho=0.0)
    dataset = simulate_dataset(params, [(10_000, 10_000)] * 10_000, seed=8)
    counts = dataset.count_arrays()
    # corrected logits would bias the rare all-positive studies; they are dropped here
    usable = (counts["tp"] > 0) & (counts["fn"] > 0)
    y_a = logit(counts["tp"][usable] / counts["n_a"][usable])
    assert y_a.mean() == pytest.approx(2.0, abs=0.05)


def test_effects_have_requested_correlation():
    rng = np.random.default_rng(0)
    theta_a, theta_b = draw_study_effects(1.0, -1.0, 2.0, 0.5, -0.6, rng, size=200_000)
    assert np.corrcoef(theta_a, theta_b)[0, 1] == pytest.approx(-0.6, abs=0.01)
    assert theta_a.std() == pytest.approx(2.0, rel=0.01)
    assert theta_b.mean() == pytest.approx(-1.0, abs=0.01)
