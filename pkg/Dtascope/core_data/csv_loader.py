import csv
import logging
import os
from typing import Dict, List, Optional, Union

from pydantic import ValidationError

from ..exceptions import DatasetValidationError
from ..report_schemas.schema_check import first_schema_error
from ..report_schemas.study_table.study_record_validator import STUDY_CSV_COLUMNS, study_record_validator
from .study_records import MIN_STUDIES, Dataset, StudyRecord

logger = logging.getLogger(__name__)

INTEGER_COLUMNS = ("id", "tp", "fp", "fn", "tn")

PathLike = Union[str, "os.PathLike[str]"]


def load_csv(path: PathLike, name: Optional[str] = None) -> Dataset:
    """
    Read a study table with header `id,label,tp,fp,fn,tn`.

    Rows are numbered from 1 for the first study (the header is not counted).
    Every validation failure raises DatasetValidationError naming the row and field.
    """
    if not os.path.isfile(path):
        raise DatasetValidationError(f"input file not found: {path}")

    with open(path, newline="", encoding="utf-8-sig") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetValidationError("file is empty; expected header id,label,tp,fp,fn,tn")
        header = [column.strip() for column in header]
        _check_header(header)

        studies: List[StudyRecord] = []
        seen_ids: Dict[int, int] = {}
        for row_number, values in enumerate(reader, start=1):
            if not values or all(not v.strip() for v in values):
                continue
            if len(values) != len(header):
                raise DatasetValidationError(
                    f"expected {len(header)} values, found {len(values)}", row=row_number
                )
            study = _parse_row(dict(zip(header, values)), row_number)
            if study.id in seen_ids:
                raise DatasetValidationError(
                    f"duplicate id {study.id} (first seen in row {seen_ids[study.id]})",
                    row=row_number,
                    field="id",
                )
            seen_ids[study.id] = row_number
            studies.append(study)

    if len(studies) < MIN_STUDIES:
        raise DatasetValidationError(f"at least {MIN_STUDIES} studies are required, found {len(studies)}")

    dataset_name = name or os.path.splitext(os.path.basename(str(path)))[0]
    logger.info("Loaded %d studies from %s", len(studies), path)
    return Dataset(studies=tuple(studies), name=dataset_name)


def _check_header(header: List[str]) -> None:
    missing = [c for c in STUDY_CSV_COLUMNS if c not in header]
    extra = [c for c in header if c not in STUDY_CSV_COLUMNS]
    if missing or extra or len(set(header)) != len(header):
        parts = []
        if missing:
            parts.append(f"missing columns {missing}")
        if extra:
            parts.append(f"unexpected columns {extra}")
        if len(set(header)) != len(header):
            parts.append("repeated column names")
        raise DatasetValidationError("bad header: " + ", ".join(parts), row=0)


def _parse_row(raw: Dict[str, str], row_number: int) -> StudyRecord:
    document = {"label": raw["label"].strip()}
    for column in INTEGER_COLUMNS:
        text = raw[column].strip()
        try:
            document[column] = int(text)
        except ValueError:
            raise DatasetValidationError(f"'{text}' is not an integer", row=row_number, field=column)

    problem = first_schema_error(document, study_record_validator)
    if problem is not None:
        field, message = problem
        raise DatasetValidationError(message, row=row_number, field=field or None)

    try:
        return StudyRecord(**document)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(p) for p in first.get("loc", ())) or None
        raise DatasetValidationError(first["msg"], row=row_number, field=field)


def write_csv(dataset: Dataset, path: PathLike) -> None:
    """Write `dataset` in the ingestion format."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(STUDY_CSV_COLUMNS)
        for study in dataset:
            writer.writerow([study.id, study.label, study.tp, study.fp, study.fn, study.tn])
