import logging
import time
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core_data.study_records import MIN_SUBSET_STUDIES, Dataset
from ..core_data.transforms import drop_studies, leave_one_out, observed_logits, observed_proportions
from ..exceptions import FitFailure
from ..mcmc_engine.Mcmc_Engine import run_chain, summarize_chains
from ..mcmc_engine.model_types import Estimate, McmcConfig, PosteriorChain, PriorSpec
from ..mcmc_engine.pooled import pooled_estimates
from ..posterior_predictive.moments import loo_predictive_moments
from ..scheduler import run_parallel
from ..sroc.sroc_curve import GRID_SIZE, delta_auc, resolve_fpr_range, sroc_curve
from .bayesian_pvalues import PValueConfig, bayesian_pvalues
from .classification import classify
from .records import FLAGGING_METHODS, AnalysisResult, InfluenceRecord, RefitSummary, Thresholds
from .relative_distance import relative_distances
from .residuals import standardized_residuals

logger = logging.getLogger(__name__)

LOO_SEED_STRIDE = 1000
REFIT_SEED_OFFSET = 100_000
MOMENTS_STREAM = 5


def loo_seed(seed: int, study_id: int) -> int:
    return seed + LOO_SEED_STRIDE * study_id


def _fit_chain(key, dataset: Dataset, prior: PriorSpec, config: McmcConfig, chain_index: int):
    """
    One chain of one fit. Failures come back as values so sibling fits keep their results.
    Only the full fit (key None) keeps random effects; the p-values read them.
    """
    try:
        return key, run_chain(dataset, prior, config, chain_index, keep_effects=key is None), None
    except Exception as exc:  # noqa: BLE001
        return key, None, f"{type(exc).__name__}: {exc}"


def fit_many(fits: List[Tuple[object, Dataset, McmcConfig]], prior: PriorSpec,
             n_jobs: Optional[int] = None) -> Tuple[Dict[object, List[PosteriorChain]], Dict[object, str]]:
    """
    Run every (key, dataset, config) fit with all its chains on the scheduler.
    Returns chains per key (sorted by chain index) and an error message per failed key.
    """
    tasks = [(key, dataset, prior, config, index)
             for key, dataset, config in fits for index in range(config.chains)]
    chains: Dict[object, List[PosteriorChain]] = {key: [] for key, _, _ in fits}
    errors: Dict[object, str] = {}
    for key, chain, error in run_parallel(_fit_chain, tasks, n_jobs=n_jobs):
        if error is not None:
            errors.setdefault(key, error)
        else:
            chains[key].append(chain)
    for key in errors:
        chains.pop(key, None)
    for key in chains:
        chains[key].sort(key=lambda c: c.chain_index)
    return chains, errors


class InfluenceAnalyzer:
    """
    Orchestrator for the influence analysis.
    Runs the full-data fit plus one leave-one-out fit per study and turns them
    into per-study relative distances, residuals, p-values and AUC changes.
    """

    def __init__(self, dataset: Dataset, prior: PriorSpec, config: McmcConfig,
                 thresholds: Optional[Thresholds] = None, pvalue_config: Optional[PValueConfig] = None,
                 reps_per_draw: int = 4, grid_size: int = GRID_SIZE, auc_range: str = "full",
                 n_jobs: Optional[int] = None):
        self.dataset = dataset
        self.prior = prior
        self.config = config
        self.thresholds = thresholds or Thresholds()
        self.pvalue_config = pvalue_config or PValueConfig(seed=config.seed)
        self.reps_per_draw = reps_per_draw
        self.grid_size = grid_size
        self.auc_range = auc_range
        self.n_jobs = n_jobs
        self.full_chains: List[PosteriorChain] = []

        # one FPR range for every fit so the AUC changes compare like with like
        self.observed_fpr = [observed_proportions(s)[1] for s in dataset]
        self.fpr_range = resolve_fpr_range(auc_range, self.observed_fpr)

    def _curve(self, chains, interval: bool = True):
        return sroc_curve(chains, self.grid_size, self.auc_range, self.observed_fpr, interval=interval)

    def fit_plan(self) -> List[Tuple[Optional[int], Dataset, McmcConfig]]:
        plan = [(None, self.dataset, self.config)]
        for study in self.dataset:
            plan.append((study.id, leave_one_out(self.dataset, study.id),
                         self.config.with_seed(loo_seed(self.config.seed, study.id))))
        return plan

    def run(self) -> AnalysisResult:
        timings = {}
        started = time.perf_counter()

        # 1. All N + 1 fits on the scheduler
        logger.info("Fitting %s: full data plus %d leave-one-out fits (%d chains each)",
                    self.dataset.name, len(self.dataset), self.config.chains)
        chains, errors = fit_many(self.fit_plan(), self.prior, self.n_jobs)
        timings["fits"] = time.perf_counter() - started

        full_failure = errors.get(None)
        if full_failure is not None:
            logger.error("Full-data fit failed: %s; keeping the leave-one-out fits as a partial result", full_failure)
        for study_id, message in errors.items():
            if study_id is None:
                continue
            logger.error("Leave-one-out fit without study %d failed: %s", study_id, message)

        # 2. Full-data summaries
        summary = pooled = curve = None
        full = self.full_chains = chains.get(None, [])
        if full:
            summary = summarize_chains(full)
            pooled = pooled_estimates(full)
            curve = self._curve(full)

        # 3. Per-study diagnostics
        phase = time.perf_counter()
        records, loo_pooled, loo_auc = [], {}, {}
        for study in self.dataset:
            record = InfluenceRecord(study_id=study.id)

            if full:
                pvalues = bayesian_pvalues(study, full, self.pvalue_config)
                record.p_a, record.p_b, record.p_sd = pvalues.p_a, pvalues.p_b, pvalues.p_sd
                record.p_ad, record.p_dor = pvalues.p_ad, pvalues.p_dor
                record.notes.extend(pvalues.notes)
            else:
                record.notes.append(f"full-data fit failed: {full_failure}")

            if study.id in chains:
                loo = chains[study.id]
                loo_pooled[study.id] = pooled_estimates(loo)
                if full:
                    rd = relative_distances(pooled, loo_pooled[study.id])
                    record.rd_a, record.rd_b, record.srd, record.ard, record.rd_dor = rd

                rng = np.random.default_rng([self.config.seed, MOMENTS_STREAM, study.id])
                moments = loo_predictive_moments(loo, study.n_a, study.n_b, self.reps_per_draw, rng)
                y = observed_logits(study)
                residuals = standardized_residuals(y, y.log_dor, moments)
                record.sr_a, record.sr_b, record.ssr = residuals.sr_a, residuals.sr_b, residuals.ssr
                record.asr, record.sr_dor = residuals.asr, residuals.sr_dor
                record.notes.extend(residuals.notes)

                loo_auc[study.id] = self._curve(loo, interval=False).auc
                if full:
                    record.delta_auc = delta_auc(curve.auc, loo_auc[study.id])
            else:
                record.notes.append(f"leave-one-out fit failed: {errors[study.id]}")

            record.flags, flag_notes = classify(record, self.thresholds)
            record.notes.extend(flag_notes)
            records.append(record)
        timings["diagnostics"] = time.perf_counter() - phase
        timings["total"] = time.perf_counter() - started

        result = AnalysisResult(
            dataset_name=self.dataset.name,
            study_ids=self.dataset.ids,
            summary=summary,
            pooled=pooled,
            sroc=curve,
            records=records,
            loo_pooled=loo_pooled,
            loo_auc=loo_auc,
            metadata=self.metadata(),
            failures={k: v for k, v in errors.items() if k is not None},
            full_fit_failure=full_failure,
            timings=timings,
        )
        logger.info("Influence analysis finished in %.1fs; flags: %s", timings["total"],
                    {method: result.flagged(method) for method in FLAGGING_METHODS})
        return result

    def metadata(self) -> dict:
        return {
            "mcmc": self.config.model_dump(),
            "prior": self.prior.model_dump(),
            "thresholds": self.thresholds.model_dump(),
            "pvalues": self.pvalue_config.model_dump(),
            "reps_per_draw": self.reps_per_draw,
            "grid_size": self.grid_size,
            "auc_range": self.auc_range,
            "fpr_range": list(self.fpr_range),
            "seeds": {
                "full": self.config.seed,
                "leave_one_out": {str(s.id): loo_seed(self.config.seed, s.id) for s in self.dataset},
            },
        }

    def sensitivity_refits(self, result: AnalysisResult) -> List[RefitSummary]:
        """One refit per flagging method with a non-empty flagged set, that set removed."""
        fits, removed = [], {}
        for index, method in enumerate(FLAGGING_METHODS):
            ids = result.flagged(method)
            if not ids:
                continue
            if len(self.dataset) - len(ids) < MIN_SUBSET_STUDIES:
                logger.warning("Skipping %s refit: removing %s leaves fewer than %d studies",
                               method, ids, MIN_SUBSET_STUDIES)
                continue
            removed[method] = ids
            fits.append((method, drop_studies(self.dataset, ids),
                         self.config.with_seed(self.config.seed + REFIT_SEED_OFFSET + index)))

        chains, errors = fit_many(fits, self.prior, self.n_jobs)
        if errors:
            method, message = next(iter(errors.items()))
            logger.error("Refit without the %s set failed: %s", method, message)
            raise FitFailure(f"refit without the {method} set: {message}")

        refits = []
        for method, ids in removed.items():
            curve = self._curve(chains[method])
            refits.append(RefitSummary(
                method=method,
                removed_ids=ids,
                n_studies=len(self.dataset) - len(ids),
                pooled=pooled_estimates(chains[method]),
                auc=Estimate(curve.auc, curve.auc_lower, curve.auc_upper),
                sroc_intercept=curve.intercept,
                sroc_slope=curve.slope,
            ))
        result.refits = refits
        return refits


def run_full_analysis(dataset: Dataset, prior: PriorSpec, config: McmcConfig,
                      thresholds: Optional[Thresholds] = None, **options) -> AnalysisResult:
    return InfluenceAnalyzer(dataset, prior, config, thresholds, **options).run()


def sensitivity_refits(dataset: Dataset, result: AnalysisResult, prior: PriorSpec, config: McmcConfig,
                       **options) -> List[RefitSummary]:
    return InfluenceAnalyzer(dataset, prior, config, **options).sensitivity_refits(result)
