import math

import numpy as np
import pytest
from scipy import stats

from Dtascope.core_data.study_records import Dataset, StudyRecord
from Dtascope.mcmc_engine.log_density import bivariate_normal_logpdf, log_joint, softplus
from Dtascope.mcmc_engine.model_types import ModelParams, PriorSpec, RandomEffects


def _dataset():
    return Dataset(studies=(
        StudyRecord(id=1, tp=7, fp=9, fn=11, tn=2),
        StudyRecord(id=2, tp=8, fp=2, fn=30, tn=60),
        StudyRecord(id=3, tp=26, fp=31, fn=19, tn=71),
    ))


def test_softplus_is_stable():
    assert softplus(1000.0) == pytest.approx(1000.0)
    assert softplus(-1000.0) == pytest.approx(0.0)
    assert softplus(0.0) == pytest.approx(math.log(2.0))


def test_bivariate_normal_matches_scipy():
    mean = np.array([0.3, -1.0])
    sd_a, sd_b, rho = 1.2, 0.7, 0.4
    cov = np.array([[sd_a ** 2, rho * sd_a * sd_b], [rho * sd_a * sd_b, sd_b ** 2]])
    point = np.array([1.1, -0.2])
    expected = stats.multivariate_normal(mean, cov).logpdf(point)
    assert bivariate_normal_logpdf(point[0], point[1], mean[0], mean[1], sd_a, sd_b, rho) == pytest.approx(expected)


def test_log_joint_matches_direct_sum():
    dataset = _dataset()
    params = ModelParams(mu_a=-0.2, mu_b=-1.0, sigma_a=0.8, sigma_b=1.1, rho=-0.3)
    theta = np.array([[-0.5, 1.4], [-1.2, -3.4], [0.3, -0.8]])
    prior = PriorSpec()

    expected = 0.0
    cov = params.covariance
    for study, (t_a, t_b) in zip(dataset, theta):
        expected += stats.binom.logpmf(study.tp, study.n_a, 1 / (1 + math.exp(-t_a)))
        expected += stats.binom.logpmf(study.fp, study.n_b, 1 / (1 + math.exp(-t_b)))
        expected += stats.multivariate_normal(params.mean, cov).logpdf([t_a, t_b])
    expected += stats.norm(0, 10).logpdf(params.mu_a) + stats.norm(0, 10).logpdf(params.mu_b)
    expected += 2 * stats.uniform(0, 10).logpdf(0.8) + stats.uniform(-1, 2).logpdf(-0.3)

    assert log_joint(dataset, params, RandomEffects(theta), prior) == pytest.approx(expected)


def test_log_joint_outside_prior_support():
    dataset = _dataset()
    theta = RandomEffects(np.zeros((3, 2)))
    wide = ModelParams(mu_a=0.0, mu_b=0.0, sigma_a=12.0, sigma_b=1.0, rho=0.0)
    assert log_joint(dataset, wide, theta, PriorSpec()) == -math.inf
    narrow_rho = PriorSpec(rho_lower=-0.5, rho_upper=0.5)
    assert log_joint(dataset, ModelParams(mu_a=0, mu_b=0, sigma_a=1, sigma_b=1, rho=0.9), theta, narrow_rho) == -math.inf


def test_log_joint_checks_effect_count():
    params = ModelParams(mu_a=0.0, mu_b=0.0, sigma_a=1.0, sigma_b=1.0, rho=0.0)
    with pytest.raises(ValueError):
        log_joint(_dataset(), params, RandomEffects(np.zeros((2, 2))), PriorSpec())


def test_prior_draws_stay_in_support():
    prior = PriorSpec(sigma_upper=2.0, rho_lower=-0.5, rho_upper=0.5)
    rng = np.random.default_rng(1)
    for _ in range(200):
        assert math.isfinite(prior.log_density(prior.draw(rng)))
