import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..core_data.csv_loader import load_csv
from ..exceptions import FitFailure
from ..influence_diagnostics.bayesian_pvalues import PValueConfig
from ..influence_diagnostics.Influence_Agent import InfluenceAnalyzer
from ..influence_diagnostics.records import AnalysisResult, Thresholds
from ..mcmc_engine.model_types import McmcConfig, PriorSpec
from .report_writer import write_bundle
from .utils import allowed_file, check_writable

logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    """Everything one `analyze` run needs."""
    model_config = ConfigDict(frozen=True)

    input_path: Path
    output_dir: Path
    mcmc: McmcConfig = Field(default_factory=McmcConfig)
    thresholds: Thresholds = Field(default_factory=Thresholds)
    prior: PriorSpec = Field(default_factory=PriorSpec)
    pvalues: Optional[PValueConfig] = None
    figures: bool = True
    export_chains: bool = False
    auc_range: Literal["full", "observed"] = "full"
    n_jobs: Optional[int] = None

    @field_validator("input_path")
    @classmethod
    def _csv_only(cls, value: Path) -> Path:
        if not allowed_file(value.name):
            raise ValueError(f"input must be a .csv file, got {value.name}")
        return value


def analyze(config: RunConfig) -> Tuple[AnalysisResult, List[Path]]:
    """
    Load, fit, diagnose, refit without each flagged set, and write the bundle.

    The input and the output directory are checked before any fitting, so a bad
    CSV or an unwritable --out fails in seconds and leaves no partial bundle. A
    failed full-data fit raises FitFailure before any output as well.
    """
    # 1. Validate input
    dataset = load_csv(config.input_path, name=config.input_path.stem)
    if config.output_dir.exists() and not config.output_dir.is_dir():
        raise NotADirectoryError(f"output path {config.output_dir} exists and is not a directory")
    check_writable(config.output_dir)

    # 2. Full-data and leave-one-out fits
    analyzer = InfluenceAnalyzer(
        dataset, config.prior, config.mcmc, config.thresholds,
        pvalue_config=config.pvalues, auc_range=config.auc_range, n_jobs=config.n_jobs,
    )
    result = analyzer.run()
    if result.full_fit_failure is not None:
        raise FitFailure(result.full_fit_failure)

    # 3. Refits without each method's flagged studies
    refit_failure = None
    try:
        analyzer.sensitivity_refits(result)
    except FitFailure as exc:
        refit_failure = exc

    # 4. Reports, written even when a refit failed
    files = write_bundle(result, dataset, config.output_dir, figures=config.figures,
                         chains=analyzer.full_chains if config.export_chains else None)
    if refit_failure is not None:
        raise refit_failure
    return result, files
