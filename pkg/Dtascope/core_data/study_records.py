"""
Typed study tables for DTA meta-analysis.

A `StudyRecord` is one study's 2x2 table against the reference standard and a
`Dataset` is the ordered collection of studies being pooled. A `StudySubset`
is what is left after deleting studies. Both are frozen;
order inside a `Dataset` defines the study index used throughout the package.
"""
from typing import Dict, Iterator, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, model_validator

from ..exceptions import UnknownStudyError

MIN_STUDIES = 3
# a leave-one-out fit of a three-study table
MIN_SUBSET_STUDIES = 2


class StudyRecord(BaseModel):
    model_config = ConfigDict(frozen=True, strict=True)

    id: PositiveInt
    label: str = ""
    tp: NonNegativeInt
    fp: NonNegativeInt
    fn: NonNegativeInt
    tn: NonNegativeInt

    @model_validator(mode="after")
    def _check_margins(self) -> "StudyRecord":
        if self.tp + self.fn < 1:
            raise ValueError("tp + fn must be at least 1 (no diseased subjects)")
        if self.fp + self.tn < 1:
            raise ValueError("fp + tn must be at least 1 (no non-diseased subjects)")
        return self

    @property
    def n_a(self) -> int:
        """Number of diseased subjects (tp + fn)."""
        return self.tp + self.fn

    @property
    def n_b(self) -> int:
        """Number of non-diseased subjects (fp + tn)."""
        return self.fp + self.tn

    @property
    def has_zero_cell(self) -> bool:
        return min(self.tp, self.fp, self.fn, self.tn) == 0


class ObservedLogits(BaseModel):
    model_config = ConfigDict(frozen=True)

    y_a: float
    y_b: float
    corrected: bool

    @property
    def log_dor(self) -> float:
        return self.y_a - self.y_b

    def as_array(self) -> np.ndarray:
        return np.array([self.y_a, self.y_b])


class Dataset(BaseModel):
    """Ordered list of at least three studies, as ingested or simulated."""
    model_config = ConfigDict(frozen=True)

    studies: Tuple[StudyRecord, ...] = Field(min_length=MIN_STUDIES)
    name: str = "dataset"

    @model_validator(mode="after")
    def _check_unique_ids(self) -> "Dataset":
        seen = set()
        for position, study in enumerate(self.studies, start=1):
            if study.id in seen:
                raise ValueError(f"duplicate study id {study.id} at position {position}")
            seen.add(study.id)
        return self

    def __len__(self) -> int:
        return len(self.studies)

    def __iter__(self) -> Iterator[StudyRecord]:
        return iter(self.studies)

    @property
    def ids(self) -> List[int]:
        return [s.id for s in self.studies]

    def get(self, study_id: int) -> StudyRecord:
        for study in self.studies:
            if study.id == study_id:
                return study
        raise UnknownStudyError(study_id)

    def index_of(self, study_id: int) -> int:
        for index, study in enumerate(self.studies):
            if study.id == study_id:
                return index
        raise UnknownStudyError(study_id)

    def count_arrays(self) -> Dict[str, np.ndarray]:
        """Counts as integer arrays in study order: tp, fp, fn, tn, n_a, n_b."""
        tp = np.array([s.tp for s in self.studies], dtype=np.int64)
        fp = np.array([s.fp for s in self.studies], dtype=np.int64)
        fn = np.array([s.fn for s in self.studies], dtype=np.int64)
        tn = np.array([s.tn for s in self.studies], dtype=np.int64)
        return {"tp": tp, "fp": fp, "fn": fn, "tn": tn, "n_a": tp + fn, "n_b": fp + tn}


class StudySubset(Dataset):
    """A dataset with studies deleted for a leave-one-out or sensitivity fit."""
    studies: Tuple[StudyRecord, ...] = Field(min_length=MIN_SUBSET_STUDIES)
