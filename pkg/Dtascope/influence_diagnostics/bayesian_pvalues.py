"""
Posterior-predictive p-values for one study under the full-data posterior.

Each of `outer_draws` evenly spaced posterior draws supplies the study's own
effects theta_i, and one replicate y* is drawn from Bin(n, expit(theta_i)).
Observed data and replicates are scored against the same predictive moments,
pooled from `inner_reps` further replicates per draw. A p-value is the share of
draws whose replicate discrepancy is strictly larger than the observed one.

A study that is not part of the fit is scored as a new study: its effects are
drawn from N(mu, Sigma) at each draw.
"""
import logging
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt

from ..core_data.simulator import draw_study_effects
from ..core_data.study_records import StudyRecord
from ..core_data.transforms import observed_logits
from ..exceptions import SingularCovarianceError
from ..mcmc_engine.model_types import PosteriorChain
from ..mcmc_engine.pooled import pooled_draws
from ..posterior_predictive.discrepancies import discrepancy_synthetic, synthetic_batch
from ..posterior_predictive.moments import MIN_INNER_REPS, PredictiveMoments, moments_given_effects
from ..posterior_predictive.replicates import logits_given_effects

logger = logging.getLogger(__name__)

PVALUE_NAMES = ("p_a", "p_b", "p_sd", "p_ad", "p_dor")


class PValueConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    outer_draws: PositiveInt = 2000
    inner_reps: int = Field(default=200, ge=MIN_INNER_REPS)
    seed: NonNegativeInt = 2020


class BayesianPValues(NamedTuple):
    p_a: Optional[float]
    p_b: Optional[float]
    p_sd: Optional[float]
    p_ad: Optional[float]
    p_dor: Optional[float]
    n_draws: int
    notes: List[str]


def _evenly_spaced(total: int, count: int) -> np.ndarray:
    if total <= count:
        return np.arange(total)
    return np.round(np.linspace(0, total - 1, count)).astype(int)


def _own_effects(study_id: int, chains: Sequence[PosteriorChain]) -> Optional[np.ndarray]:
    """The study's retained effects (draws, 2) in pooled order, or None when the fit did not keep them."""
    chains = sorted(chains, key=lambda c: c.chain_index)
    if any(c.theta is None or study_id not in c.study_ids for c in chains):
        return None
    return np.concatenate([c.theta[:, c.study_ids.index(study_id), :] for c in chains], axis=0)


def study_effect_draws(study_id: int, chains: Sequence[PosteriorChain], count: int,
                       rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, bool]:
    """(theta_a, theta_b, own) at `count` evenly spaced draws; `own` is False for new-study effects."""
    xi = pooled_draws(chains)
    index = _evenly_spaced(xi.shape[0], count)
    theta = _own_effects(study_id, chains)
    if theta is not None:
        return theta[index, 0], theta[index, 1], True
    xi = xi[index]
    theta_a, theta_b = draw_study_effects(xi[:, 0], xi[:, 1], xi[:, 2], xi[:, 3], xi[:, 4], rng, size=index.size)
    return theta_a, theta_b, False


def _scaled_square(value, mean: float, variance: float):
    if not variance > 0.0:
        return None
    return (np.asarray(value, dtype=float) - mean) ** 2 / variance


def _tail_share(replicate: Optional[np.ndarray], observed) -> Optional[float]:
    if replicate is None or observed is None or not np.isfinite(observed):
        return None
    return float(np.mean(replicate > observed))


def _synthetic(obs: np.ndarray, rep: np.ndarray, moments: PredictiveMoments):
    try:
        observed = discrepancy_synthetic(obs, moments.mean, moments.cov)
    except SingularCovarianceError:
        return None, None
    cov = np.broadcast_to(moments.cov, (rep.shape[0], 2, 2))
    return synthetic_batch(rep - moments.mean, cov), observed


def bayesian_pvalues(study: StudyRecord, full_chains: Sequence[PosteriorChain],
                     config: Optional[PValueConfig] = None) -> BayesianPValues:
    config = config or PValueConfig()
    rng = np.random.default_rng([config.seed, study.id])
    theta_a, theta_b, own = study_effect_draws(study.id, full_chains, config.outer_draws, rng)
    k = theta_a.size

    moments = moments_given_effects(theta_a, theta_b, study.n_a, study.n_b, config.inner_reps, rng)
    rep_a, rep_b = logits_given_effects(theta_a, theta_b, study.n_a, study.n_b, rng)

    y = observed_logits(study)
    obs = np.array([y.y_a, y.y_b])
    mean_a, mean_b = moments.mean

    d_a_obs = _scaled_square(y.y_a, mean_a, moments.var_a)
    d_a_rep = _scaled_square(rep_a, mean_a, moments.var_a)
    d_b_obs = _scaled_square(y.y_b, mean_b, moments.var_b)
    d_b_rep = _scaled_square(rep_b, mean_b, moments.var_b)
    sd_rep, sd_obs = _synthetic(obs, np.column_stack([rep_a, rep_b]), moments)
    dor_obs = _scaled_square(y.log_dor, moments.mean_log_dor, moments.var_log_dor)
    dor_rep = _scaled_square(rep_a - rep_b, moments.mean_log_dor, moments.var_log_dor)

    ad_obs = ad_rep = None
    if d_a_obs is not None and d_b_obs is not None:
        ad_obs, ad_rep = d_a_obs + d_b_obs, d_a_rep + d_b_rep

    notes = []
    if not own:
        notes.append("study effects drawn as a new study: the fit did not retain them")
    if sd_obs is None:
        notes.append("p_sd missing: near-singular predictive covariance")

    result = BayesianPValues(
        p_a=_tail_share(d_a_rep, d_a_obs),
        p_b=_tail_share(d_b_rep, d_b_obs),
        p_sd=_tail_share(sd_rep, sd_obs),
        p_ad=_tail_share(ad_rep, ad_obs),
        p_dor=_tail_share(dor_rep, dor_obs),
        n_draws=k,
        notes=notes,
    )
    for name in PVALUE_NAMES:
        if getattr(result, name) is None and not (name == "p_sd" and sd_obs is None):
            notes.append(f"{name} missing: zero predictive variance")
    logger.debug("Study %d p-values: %s", study.id, {n: getattr(result, n) for n in PVALUE_NAMES})
    return result
