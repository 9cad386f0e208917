import logging
import math
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

from ..core_data.study_records import Dataset
from ..core_data.transforms import corrected_logits
from ..exceptions import SamplerInitError
from ..scheduler import run_parallel
from .convergence import effective_sample_size, split_rhat
from .kernel import BLOCK_TARGET_ACCEPTANCE, SCALAR_TARGET_ACCEPTANCE, AdaptiveScale, RandomWalkKernel
from .log_density import binomial_kernel, bivariate_normal_logpdf
from .model_types import (
    PARAM_NAMES,
    McmcConfig,
    ParameterSummary,
    PosteriorChain,
    PosteriorSummary,
    PriorSpec,
)

logger = logging.getLogger(__name__)

MAX_INIT_ATTEMPTS = 100
RHAT_WARNING_LEVEL = 1.05
SIGMA_FLOOR = 0.1


class _NonFiniteStart(Exception):
    pass


class _ChainState:
    """Current position of one chain plus cached per-study log-density terms."""

    def __init__(self, theta, mu, sigma, rho):
        self.theta = theta
        self.mu = mu
        self.sigma = sigma
        self.rho = rho
        self.log_lik = None
        self.log_re = None


class BivariateMcmcEngine:
    """
    Adaptive random-walk Metropolis-within-Gibbs for the bivariate
    binomial / logit-normal model.

    Blocks per iteration: every study's (theta_A, theta_B) pair (updated
    jointly per study, all studies in one vectorised sweep since they are
    conditionally independent given xi), mu as a pair, log sigma_A,
    log sigma_B and Fisher-z of rho. Step sizes adapt during burn-in and are
    frozen afterwards.
    """

    def __init__(self, dataset: Dataset, prior: PriorSpec, config: McmcConfig,
                 kernel: Optional[RandomWalkKernel] = None):
        self.dataset = dataset
        self.prior = prior
        self.config = config
        self.kernel = kernel or RandomWalkKernel()

        counts = dataset.count_arrays()
        self.tp = counts["tp"].astype(float)
        self.fp = counts["fp"].astype(float)
        self.n_a = counts["n_a"].astype(float)
        self.n_b = counts["n_b"].astype(float)
        y_a, y_b, _ = corrected_logits(counts["tp"], counts["fp"], counts["fn"], counts["tn"])
        self.observed = np.column_stack([y_a, y_b])
        # sd of an observed logit, used only to shape the theta proposals
        shift = 0.5
        self.logit_sd = np.column_stack([
            np.sqrt(1.0 / (counts["tp"] + shift) + 1.0 / (counts["fn"] + shift)),
            np.sqrt(1.0 / (counts["fp"] + shift) + 1.0 / (counts["tn"] + shift)),
        ])

    # ------------------------------------------------------------------ #
    # log-density pieces
    # ------------------------------------------------------------------ #
    def _study_log_lik(self, theta: np.ndarray) -> np.ndarray:
        return binomial_kernel(self.tp, self.n_a, theta[:, 0]) + binomial_kernel(self.fp, self.n_b, theta[:, 1])

    def _study_log_re(self, theta, mu, sigma, rho) -> np.ndarray:
        return bivariate_normal_logpdf(theta[:, 0], theta[:, 1], mu[0], mu[1], sigma[0], sigma[1], rho)

    def _log_prior_mu(self, mu) -> float:
        z = (mu - self.prior.mu_mean) / self.prior.mu_sd
        return float(-0.5 * np.dot(z, z))

    def _in_support(self, sigma, rho) -> bool:
        upper = self.prior.sigma_upper
        return bool(np.all(sigma > 0.0) and np.all(sigma < upper) and self.prior.rho_lower < rho < self.prior.rho_upper)

    # ------------------------------------------------------------------ #
    # initialisation
    # ------------------------------------------------------------------ #
    def _candidate_state(self, rng: np.random.Generator, attempt: int) -> _ChainState:
        theta = self.observed.copy()
        mu = theta.mean(axis=0)
        sd = theta.std(axis=0, ddof=1) if theta.shape[0] > 1 else np.ones(2)
        sigma = np.clip(np.nan_to_num(sd, nan=1.0), SIGMA_FLOOR, 0.5 * self.prior.sigma_upper)
        rho = 0.0
        if not self.prior.rho_lower < rho < self.prior.rho_upper:
            rho = 0.5 * (self.prior.rho_lower + self.prior.rho_upper)
        if attempt > 1:
            jitter = 0.1 * attempt
            theta = theta + jitter * rng.standard_normal(theta.shape)
            mu = mu + jitter * rng.standard_normal(2)

        state = _ChainState(theta, mu, sigma, rho)
        state.log_lik = self._study_log_lik(theta)
        state.log_re = self._study_log_re(theta, mu, sigma, rho)
        total = np.sum(state.log_lik) + np.sum(state.log_re) + self._log_prior_mu(mu)
        if not (math.isfinite(total) and self._in_support(sigma, rho)):
            raise _NonFiniteStart(f"log density {total} at attempt {attempt}")
        return state

    def _initial_state(self, rng: np.random.Generator) -> _ChainState:
        try:
            for attempt in Retrying(stop=stop_after_attempt(MAX_INIT_ATTEMPTS),
                                    retry=retry_if_exception_type(_NonFiniteStart)):
                with attempt:
                    state = self._candidate_state(rng, attempt.retry_state.attempt_number)
        except RetryError as exc:
            raise SamplerInitError(
                f"no finite starting point after {MAX_INIT_ATTEMPTS} attempts"
            ) from exc
        return state

    # ------------------------------------------------------------------ #
    # sampling
    # ------------------------------------------------------------------ #
    def run_chain(self, chain_index: int, keep_effects: bool = True) -> PosteriorChain:
        config = self.config
        rng = np.random.default_rng([config.seed, chain_index])
        started = time.perf_counter()
        logger.debug("Chain %d started (%d iterations, seed %d)", chain_index, config.iterations, config.seed)

        state = self._initial_state(rng)
        n_studies = len(self.dataset)
        base_mu = np.maximum(self.observed.std(axis=0) / math.sqrt(n_studies), 0.05)

        scales = {
            "theta": AdaptiveScale(self.logit_sd, BLOCK_TARGET_ACCEPTANCE),
            "mu": AdaptiveScale(base_mu.reshape(1, 2), BLOCK_TARGET_ACCEPTANCE),
            "sigma_a": AdaptiveScale([0.3], SCALAR_TARGET_ACCEPTANCE),
            "sigma_b": AdaptiveScale([0.3], SCALAR_TARGET_ACCEPTANCE),
            "rho": AdaptiveScale([0.3], SCALAR_TARGET_ACCEPTANCE),
        }

        n_keep = config.retained_draws
        xi_draws = np.empty((n_keep, len(PARAM_NAMES)))
        theta_draws = np.empty((n_keep, n_studies, 2)) if keep_effects else None
        stored = 0

        for i in range(config.iterations):
            if i == config.burn_in:
                for scale in scales.values():
                    scale.freeze()

            self._update_theta(state, scales["theta"], rng)
            self._update_mu(state, scales["mu"], rng)
            self._update_sigma(state, 0, scales["sigma_a"], rng)
            self._update_sigma(state, 1, scales["sigma_b"], rng)
            self._update_rho(state, scales["rho"], rng)

            if i < config.burn_in:
                if (i + 1) % config.adapt_window == 0:
                    for scale in scales.values():
                        scale.adapt()
            elif (i - config.burn_in + 1) % config.thin == 0 and stored < n_keep:
                xi_draws[stored] = (state.mu[0], state.mu[1], state.sigma[0], state.sigma[1], state.rho)
                if theta_draws is not None:
                    theta_draws[stored] = state.theta
                stored += 1

        rates = {name: scale.acceptance_rate for name, scale in scales.items()}
        logger.debug("Chain %d finished in %.1fs; acceptance %s", chain_index,
                     time.perf_counter() - started, {k: round(v, 3) for k, v in rates.items()})
        return PosteriorChain(
            xi=xi_draws[:stored],
            theta=None if theta_draws is None else theta_draws[:stored],
            acceptance_rates=rates,
            chain_index=chain_index,
            study_ids=tuple(self.dataset.ids),
        )

    def _update_theta(self, state: _ChainState, scale: AdaptiveScale, rng) -> None:
        proposal = self.kernel.propose(state.theta, scale.scale, rng)
        log_lik = self._study_log_lik(proposal)
        log_re = self._study_log_re(proposal, state.mu, state.sigma, state.rho)
        log_ratio = (log_lik + log_re) - (state.log_lik + state.log_re)
        accepted = np.broadcast_to(np.asarray(self.kernel.accept(log_ratio, rng), dtype=bool), log_ratio.shape)
        state.theta[accepted] = proposal[accepted]
        state.log_lik[accepted] = log_lik[accepted]
        state.log_re[accepted] = log_re[accepted]
        scale.record(accepted)

    def _update_mu(self, state: _ChainState, scale: AdaptiveScale, rng) -> None:
        proposal = self.kernel.propose(state.mu, scale.scale[0], rng)
        log_re = self._study_log_re(state.theta, proposal, state.sigma, state.rho)
        log_ratio = (np.sum(log_re) + self._log_prior_mu(proposal)) - (np.sum(state.log_re) + self._log_prior_mu(state.mu))
        accepted = self.kernel.accept(log_ratio, rng)
        if accepted:
            state.mu = proposal
            state.log_re = log_re
        scale.record(accepted)

    def _update_sigma(self, state: _ChainState, which: int, scale: AdaptiveScale, rng) -> None:
        log_sigma = math.log(state.sigma[which])
        proposed_log = float(self.kernel.propose(np.array([log_sigma]), scale.scale, rng)[0])
        sigma = state.sigma.copy()
        sigma[which] = math.exp(proposed_log)
        if self._in_support(sigma, state.rho):
            log_re = self._study_log_re(state.theta, state.mu, sigma, state.rho)
            # uniform prior on sigma; + log-Jacobian of the log transform
            log_ratio = np.sum(log_re) - np.sum(state.log_re) + (proposed_log - log_sigma)
        else:
            log_re, log_ratio = None, -math.inf
        accepted = self.kernel.accept(log_ratio, rng)
        if accepted:
            state.sigma = sigma
            state.log_re = log_re
        scale.record(accepted)

    def _update_rho(self, state: _ChainState, scale: AdaptiveScale, rng) -> None:
        z = math.atanh(state.rho)
        proposed_z = float(self.kernel.propose(np.array([z]), scale.scale, rng)[0])
        rho = math.tanh(proposed_z)
        if self._in_support(state.sigma, rho) and abs(rho) < 1.0:
            log_re = self._study_log_re(state.theta, state.mu, state.sigma, rho)
            # uniform prior on rho; + log-Jacobian of tanh
            log_ratio = (np.sum(log_re) - np.sum(state.log_re)
                         + math.log1p(-rho * rho) - math.log1p(-state.rho * state.rho))
        else:
            log_re, log_ratio = None, -math.inf
        accepted = self.kernel.accept(log_ratio, rng)
        if accepted:
            state.rho = rho
            state.log_re = log_re
        scale.record(accepted)


def run_chain(dataset: Dataset, prior: PriorSpec, config: McmcConfig, chain_index: int,
              kernel: Optional[RandomWalkKernel] = None, keep_effects: bool = True) -> PosteriorChain:
    return BivariateMcmcEngine(dataset, prior, config, kernel).run_chain(chain_index, keep_effects)


def run_mcmc(dataset: Dataset, prior: PriorSpec, config: McmcConfig,
             kernel: Optional[RandomWalkKernel] = None, n_jobs: Optional[int] = None,
             keep_effects: bool = True) -> Tuple[List[PosteriorChain], PosteriorSummary]:
    """Run `config.chains` independent chains and summarise the pooled draws."""
    tasks = [(dataset, prior, config, index, kernel, keep_effects) for index in range(config.chains)]
    chains = run_parallel(run_chain, tasks, n_jobs=n_jobs)
    chains = sorted(chains, key=lambda c: c.chain_index)
    return chains, summarize_chains(chains)


def summarize_chains(chains: Sequence[PosteriorChain]) -> PosteriorSummary:
    chains = sorted(chains, key=lambda c: c.chain_index)
    if not chains:
        raise ValueError("no chains to summarise")
    length = min(c.n_draws for c in chains)
    parameters = {}
    warnings = []
    for column, name in enumerate(PARAM_NAMES):
        stacked = np.array([c.xi[:length, column] for c in chains])
        pooled = stacked.ravel()
        r_hat = split_rhat(stacked)
        ess = effective_sample_size(stacked)
        sd = float(np.std(pooled, ddof=1))
        mcse = sd / math.sqrt(ess) if ess and math.isfinite(ess) and ess > 0 else float("nan")
        parameters[name] = ParameterSummary(
            mean=float(np.mean(pooled)),
            sd=sd,
            q025=float(np.quantile(pooled, 0.025)),
            q975=float(np.quantile(pooled, 0.975)),
            r_hat=r_hat,
            ess=ess,
            mcse=mcse,
        )
        if math.isfinite(r_hat) and r_hat > RHAT_WARNING_LEVEL:
            message = f"R-hat for {name} is {r_hat:.3f} (> {RHAT_WARNING_LEVEL})"
            logger.warning(message)
            warnings.append(message)
    return PosteriorSummary(parameters=parameters, n_chains=len(chains), n_draws=length * len(chains),
                            warnings=warnings)
