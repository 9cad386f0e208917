import math

import numpy as np
import pytest
from pydantic import ValidationError

from Dtascope.core_data.study_records import Dataset, StudyRecord, StudySubset
from Dtascope.core_data.transforms import (
    corrected_logits,
    drop_studies,
    leave_one_out,
    observed_logits,
    observed_proportion_intervals,
    observed_proportions,
)
from Dtascope.exceptions import DatasetValidationError, UnknownStudyError


def _dataset(n=4):
    studies = tuple(StudyRecord(id=i, label=f"s{i}", tp=10 + i, fp=5 + i, fn=8, tn=40) for i in range(1, n + 1))
    return Dataset(studies=studies, name="toy")


def test_study_margins():
    study = StudyRecord(id=1, tp=7, fp=9, fn=11, tn=2)
    assert study.n_a == 18
    assert study.n_b == 11
    assert not study.has_zero_cell
    assert StudyRecord(id=2, tp=9, fp=0, fn=6, tn=37).has_zero_cell


def test_study_without_diseased_subjects_is_rejected():
    with pytest.raises(ValidationError):
        StudyRecord(id=1, tp=0, fp=3, fn=0, tn=5)


def test_duplicate_ids_are_rejected():
    study = StudyRecord(id=1, tp=1, fp=1, fn=1, tn=1)
    other = StudyRecord(id=2, tp=1, fp=1, fn=1, tn=1)
    with pytest.raises(ValidationError, match="duplicate study id 1"):
        Dataset(studies=(study, other, study))


def test_dataset_holds_at_least_three_studies():
    with pytest.raises(ValidationError):
        _dataset(2)
    subset = StudySubset(studies=_dataset(3).studies[:2], name="toy without 3")
    assert isinstance(subset, Dataset) and len(subset) == 2


def test_corrected_logits_without_zero_cells():
    y_a, y_b, corrected = corrected_logits(20, 41, 2, 7)
    assert y_a == pytest.approx(math.log(20 / 2))
    assert y_b == pytest.approx(math.log(41 / 7))
    assert not corrected


def test_zero_cell_adds_half_to_every_cell():
    y_a, y_b, corrected = corrected_logits([0], [2], [10], [20])
    assert y_a[0] == pytest.approx(math.log(0.5 / 10.5))
    assert y_b[0] == pytest.approx(math.log(2.5 / 20.5))
    assert corrected[0]


def test_observed_logits_log_dor():
    study = StudyRecord(id=1, tp=14, fp=21, fn=101, tn=165)
    y = observed_logits(study)
    assert y.log_dor == pytest.approx(math.log((14 * 165) / (21 * 101)))
    assert not y.corrected


def test_proportions_and_exact_intervals():
    study = StudyRecord(id=9, tp=9, fp=0, fn=6, tn=37)
    sens, fpr = observed_proportions(study)
    (sens_lo, sens_hi), (fpr_lo, fpr_hi) = observed_proportion_intervals(study)
    assert sens == pytest.approx(0.6)
    assert fpr == 0.0
    assert sens_lo < sens < sens_hi
    assert fpr_lo == 0.0 and 0.0 < fpr_hi < 0.15


def test_leave_one_out_keeps_order_and_ids():
    dataset = _dataset(4)
    loo = leave_one_out(dataset, 2)
    assert loo.ids == [1, 3, 4]
    assert np.array_equal(loo.count_arrays()["tp"], [11, 13, 14])


def test_leave_one_out_unknown_id():
    with pytest.raises(UnknownStudyError):
        leave_one_out(_dataset(4), 99)


def test_leave_one_out_needs_three_studies():
    pair = drop_studies(_dataset(4), [1, 2])
    assert isinstance(pair, StudySubset)
    with pytest.raises(DatasetValidationError):
        leave_one_out(pair, 3)
    assert leave_one_out(_dataset(3), 1).ids == [2, 3]


def test_drop_studies_must_leave_two():
    dataset = _dataset(4)
    assert drop_studies(dataset, [1, 4]).ids == [2, 3]
    with pytest.raises(DatasetValidationError):
        drop_studies(dataset, [1, 2, 3])
