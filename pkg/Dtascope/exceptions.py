from typing import Optional


class DtascopeError(Exception):
    """Base class for errors raised by Dtascope."""


class DatasetValidationError(DtascopeError, ValueError):
    """A study table failed validation. Carries the offending row and field when known."""

    def __init__(self, message: str, row: Optional[int] = None, field: Optional[str] = None):
        self.row = row
        self.field = field
        location = []
        if row is not None:
            location.append(f"row {row}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


class UnknownStudyError(DtascopeError, KeyError):
    def __init__(self, study_id: int):
        self.study_id = study_id
        super().__init__(f"study id {study_id} is not in the dataset")

    def __str__(self) -> str:
        return self.args[0]


class SamplerInitError(DtascopeError, RuntimeError):
    """No finite starting point was found for the sampler."""


class SingularCovarianceError(DtascopeError, ValueError):
    def __init__(self, det: float, message: str = "covariance matrix is near-singular"):
        self.det = det
        super().__init__(f"{message} (det={det:.3e})")


class InsufficientReplicatesError(DtascopeError, ValueError):
    pass


class FitFailure(DtascopeError, RuntimeError):
    """An MCMC fit could not be completed. `study_id` is None for the full-data fit."""

    def __init__(self, message: str, study_id: Optional[int] = None):
        self.study_id = study_id
        label = "full-data fit" if study_id is None else f"leave-one-out fit without study {study_id}"
        super().__init__(f"{label}: {message}")
