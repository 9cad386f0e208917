import logging
from typing import Sequence, Tuple

import numpy as np
from scipy.special import expit

from ..mcmc_engine.model_types import ModelParams
from .study_records import MIN_STUDIES, Dataset, StudyRecord

logger = logging.getLogger(__name__)


def draw_study_effects(mu_a, mu_b, sigma_a, sigma_b, rho, rng: np.random.Generator, size=None):
    """
    Draw theta ~ N(mu, Sigma) by the Cholesky construction. Parameters broadcast
    against each other and against `size`. Returns (theta_a, theta_b).
    """
    z_a = rng.standard_normal(size)
    z_b = rng.standard_normal(size)
    rho = np.asarray(rho, dtype=float)
    theta_a = mu_a + sigma_a * z_a
    theta_b = mu_b + sigma_b * (rho * z_a + np.sqrt(1.0 - rho ** 2) * z_b)
    return theta_a, theta_b


def simulate_dataset(params: ModelParams, sizes: Sequence[Tuple[int, int]], seed: int, name: str = "simulated") -> Dataset:
    """Generate one study per (n_a, n_b) pair from the bivariate model; deterministic given `seed`."""
    sizes = [(int(n_a), int(n_b)) for n_a, n_b in sizes]
    if any(n_a < 1 or n_b < 1 for n_a, n_b in sizes):
        raise ValueError("every study needs n_a >= 1 and n_b >= 1")
    if len(sizes) < MIN_STUDIES:
        raise ValueError(f"at least {MIN_STUDIES} study sizes are required, got {len(sizes)}")

    rng = np.random.default_rng(seed)
    n_a = np.array([s[0] for s in sizes], dtype=np.int64)
    n_b = np.array([s[1] for s in sizes], dtype=np.int64)
    theta_a, theta_b = draw_study_effects(
        params.mu_a, params.mu_b, params.sigma_a, params.sigma_b, params.rho, rng, size=len(sizes)
    )
    tp = rng.binomial(n_a, expit(theta_a))
    fp = rng.binomial(n_b, expit(theta_b))

    studies = tuple(
        StudyRecord(
            id=i + 1,
            label=f"sim-{i + 1}",
            tp=int(tp[i]),
            fp=int(fp[i]),
            fn=int(n_a[i] - tp[i]),
            tn=int(n_b[i] - fp[i]),
        )
        for i in range(len(sizes))
    )
    logger.debug("Simulated %d studies with seed %d", len(studies), seed)
    return Dataset(studies=studies, name=name)
