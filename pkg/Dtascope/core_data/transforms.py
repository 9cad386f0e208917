from typing import Iterable, Tuple

import numpy as np
from scipy import stats

from ..exceptions import DatasetValidationError, UnknownStudyError
from .study_records import MIN_STUDIES, MIN_SUBSET_STUDIES, Dataset, ObservedLogits, StudyRecord, StudySubset

CONTINUITY_CORRECTION = 0.5


def corrected_logits(tp, fp, fn, tn) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Logit sensitivity and logit FPR for arrays of 2x2 tables.

    Tables with any zero cell get 0.5 added to all four cells. The same rule is
    applied to observed studies and to posterior-predictive replicates.
    Returns (y_a, y_b, corrected).
    """
    tp = np.asarray(tp, dtype=float)
    fp = np.asarray(fp, dtype=float)
    fn = np.asarray(fn, dtype=float)
    tn = np.asarray(tn, dtype=float)
    corrected = (tp == 0) | (fp == 0) | (fn == 0) | (tn == 0)
    shift = np.where(corrected, CONTINUITY_CORRECTION, 0.0)
    y_a = np.log(tp + shift) - np.log(fn + shift)
    y_b = np.log(fp + shift) - np.log(tn + shift)
    return y_a, y_b, corrected


def observed_logits(study: StudyRecord) -> ObservedLogits:
    y_a, y_b, corrected = corrected_logits(study.tp, study.fp, study.fn, study.tn)
    return ObservedLogits(y_a=float(y_a), y_b=float(y_b), corrected=bool(corrected))


def observed_proportions(study: StudyRecord) -> Tuple[float, float]:
    """Uncorrected (sensitivity, FPR) for display."""
    return study.tp / study.n_a, study.fp / study.n_b


def observed_proportion_intervals(study: StudyRecord, level: float = 0.95) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Exact (Clopper-Pearson) intervals for sensitivity and FPR."""
    return (
        _clopper_pearson(study.tp, study.n_a, level),
        _clopper_pearson(study.fp, study.n_b, level),
    )


def _clopper_pearson(k: int, n: int, level: float) -> Tuple[float, float]:
    alpha = 1.0 - level
    lower = 0.0 if k == 0 else float(stats.beta.ppf(alpha / 2, k, n - k + 1))
    upper = 1.0 if k == n else float(stats.beta.ppf(1 - alpha / 2, k + 1, n - k))
    return lower, upper


def leave_one_out(dataset: Dataset, study_id: int) -> StudySubset:
    if len(dataset) < MIN_STUDIES:
        raise DatasetValidationError(
            f"leave-one-out needs at least {MIN_STUDIES} studies, dataset has {len(dataset)}"
        )
    if study_id not in dataset.ids:
        raise UnknownStudyError(study_id)
    return drop_studies(dataset, [study_id])


def drop_studies(dataset: Dataset, study_ids: Iterable[int]) -> StudySubset:
    """Remove a set of studies, keeping order and ids of the rest."""
    removed = set(study_ids)
    for study_id in removed:
        if study_id not in dataset.ids:
            raise UnknownStudyError(study_id)
    remaining = tuple(s for s in dataset.studies if s.id not in removed)
    if len(remaining) < MIN_SUBSET_STUDIES:
        raise DatasetValidationError(
            f"removing {sorted(removed)} would leave {len(remaining)} studies; "
            f"at least {MIN_SUBSET_STUDIES} are required"
        )
    suffix = ",".join(str(i) for i in sorted(removed))
    return StudySubset(studies=remaining, name=f"{dataset.name} without {suffix}")
