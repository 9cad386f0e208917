"""
Result types for the influence analysis. Every type round-trips through a
plain dict so `analysis.json` can be written and read back without loss.
Missing statistics are None both in memory and in JSON.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat

from ..mcmc_engine.model_types import Estimate, PooledEstimates, PosteriorSummary
from ..sroc.sroc_curve import SrocCurve

SCHEMA_VERSION = 1

# flagging method -> flag name; also the row order of the refit table
FLAGGING_METHODS: Dict[str, str] = {
    "relative_distance": "srd",
    "standardized_residual": "ssr",
    "bayesian_p_value": "pvalue",
    "diagnostic_odds_ratio": "rd_dor",
    "auc_influence": "dauc",
}
FLAG_NAMES: Tuple[str, ...] = tuple(FLAGGING_METHODS.values())

STATISTIC_NAMES: Tuple[str, ...] = (
    "rd_a", "rd_b", "srd", "ard", "rd_dor",
    "sr_a", "sr_b", "ssr", "asr", "sr_dor",
    "p_a", "p_b", "p_sd", "p_ad", "p_dor",
    "delta_auc",
)


class Thresholds(BaseModel):
    """Cut-offs for outlying / influential studies. SSR uses the upper 10% point of chi-square(2)."""
    model_config = ConfigDict(frozen=True)

    srd: PositiveFloat = 0.05
    ssr: PositiveFloat = 4.61
    p_value: float = Field(default=0.15, gt=0.0, lt=1.0)
    delta_auc: PositiveFloat = 0.02
    rd_dor: PositiveFloat = 0.05


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


@dataclass
class InfluenceRecord:
    study_id: int
    rd_a: Optional[float] = None
    rd_b: Optional[float] = None
    srd: Optional[float] = None
    ard: Optional[float] = None
    rd_dor: Optional[float] = None
    sr_a: Optional[float] = None
    sr_b: Optional[float] = None
    ssr: Optional[float] = None
    asr: Optional[float] = None
    sr_dor: Optional[float] = None
    p_a: Optional[float] = None
    p_b: Optional[float] = None
    p_sd: Optional[float] = None
    p_ad: Optional[float] = None
    p_dor: Optional[float] = None
    delta_auc: Optional[float] = None
    flags: Dict[str, bool] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def is_complete(self) -> bool:
        return all(getattr(self, name) is not None for name in STATISTIC_NAMES)

    def statistics(self) -> Dict[str, Optional[float]]:
        return {name: getattr(self, name) for name in STATISTIC_NAMES}

    def to_dict(self) -> dict:
        data = {"study_id": self.study_id}
        data.update({name: _clean(value) for name, value in self.statistics().items()})
        data["flags"] = {name: bool(self.flags.get(name, False)) for name in FLAG_NAMES}
        data["notes"] = list(self.notes)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "InfluenceRecord":
        return cls(
            study_id=data["study_id"],
            flags=dict(data.get("flags", {})),
            notes=list(data.get("notes", [])),
            **{name: data.get(name) for name in STATISTIC_NAMES},
        )


@dataclass
class RefitSummary:
    """Pooled estimates of a refit with one flagging method's studies removed."""
    method: str
    removed_ids: List[int]
    n_studies: int
    pooled: PooledEstimates
    auc: Estimate
    sroc_intercept: float
    sroc_slope: float

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "removed_ids": list(self.removed_ids),
            "n_studies": self.n_studies,
            "pooled": self.pooled.to_dict(),
            "auc": self.auc.to_dict(),
            "sroc_intercept": self.sroc_intercept,
            "sroc_slope": self.sroc_slope,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RefitSummary":
        return cls(
            method=data["method"],
            removed_ids=list(data["removed_ids"]),
            n_studies=data["n_studies"],
            pooled=PooledEstimates.from_dict(data["pooled"]),
            auc=Estimate.from_dict(data["auc"]),
            sroc_intercept=data["sroc_intercept"],
            sroc_slope=data["sroc_slope"],
        )


@dataclass
class AnalysisResult:
    dataset_name: str
    study_ids: List[int]
    summary: Optional[PosteriorSummary]
    pooled: Optional[PooledEstimates]
    sroc: Optional[SrocCurve]
    records: List[InfluenceRecord]
    loo_pooled: Dict[int, PooledEstimates]
    loo_auc: Dict[int, float]
    metadata: dict
    failures: Dict[int, str] = field(default_factory=dict)
    # set when the full-data fit failed; summary, pooled and sroc are then None
    full_fit_failure: Optional[str] = None
    refits: List[RefitSummary] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    def record(self, study_id: int) -> InfluenceRecord:
        for record in self.records:
            if record.study_id == study_id:
                return record
        raise KeyError(study_id)

    def flagged(self, flag: str) -> List[int]:
        """Study ids whose `flag` (a flag name or a flagging method) is set, in dataset order."""
        flag = FLAGGING_METHODS.get(flag, flag)
        if flag not in FLAG_NAMES:
            raise KeyError(f"unknown flag {flag!r}")
        return [r.study_id for r in self.records if r.flags.get(flag, False)]

    @property
    def n_comparisons(self) -> int:
        return len(self.records) * len(FLAG_NAMES)

    @property
    def complete(self) -> bool:
        return self.full_fit_failure is None and not self.failures and all(r.is_complete for r in self.records)

    def to_dict(self, include_timings: bool = False) -> dict:
        data = {
            "schema": SCHEMA_VERSION,
            "dataset": self.dataset_name,
            "study_ids": list(self.study_ids),
            "metadata": self.metadata,
            "summary": self.summary.to_dict() if self.summary is not None else None,
            "pooled": self.pooled.to_dict() if self.pooled is not None else None,
            "sroc": self.sroc.to_dict(include_grid=False) if self.sroc is not None else None,
            "records": [r.to_dict() for r in self.records],
            "loo_pooled": {str(k): v.to_dict() for k, v in self.loo_pooled.items()},
            "loo_auc": {str(k): v for k, v in self.loo_auc.items()},
            "failures": {str(k): v for k, v in self.failures.items()},
            "refits": [r.to_dict() for r in self.refits],
            "n_comparisons": self.n_comparisons,
        }
        if self.full_fit_failure is not None:
            data["full_fit_failure"] = self.full_fit_failure
        if include_timings:
            data["timings"] = dict(self.timings)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "AnalysisResult":
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported analysis schema {data.get('schema')!r}")
        return cls(
            dataset_name=data["dataset"],
            study_ids=list(data["study_ids"]),
            summary=PosteriorSummary.from_dict(data["summary"]) if data["summary"] is not None else None,
            pooled=PooledEstimates.from_dict(data["pooled"]) if data["pooled"] is not None else None,
            sroc=SrocCurve.from_dict(data["sroc"]) if data["sroc"] is not None else None,
            records=[InfluenceRecord.from_dict(r) for r in data["records"]],
            loo_pooled={int(k): PooledEstimates.from_dict(v) for k, v in data["loo_pooled"].items()},
            loo_auc={int(k): v for k, v in data["loo_auc"].items()},
            metadata=data["metadata"],
            failures={int(k): v for k, v in data.get("failures", {}).items()},
            full_fit_failure=data.get("full_fit_failure"),
            refits=[RefitSummary.from_dict(r) for r in data.get("refits", [])],
            timings=dict(data.get("timings", {})),
        )
