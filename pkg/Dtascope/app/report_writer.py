"""
Writes the analysis bundle: analysis.json, diagnostics.csv, pooled.csv,
sroc_grid.csv, summary.txt, optional chains.csv and figures, and finally
manifest.json with a SHA-256 per file.
"""
import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from ..core_data.study_records import Dataset
from ..core_data.transforms import observed_proportion_intervals, observed_proportions
from ..influence_diagnostics.records import FLAG_NAMES, FLAGGING_METHODS, STATISTIC_NAMES, AnalysisResult
from ..mcmc_engine.export import export_chain_csv
from ..mcmc_engine.model_types import Estimate, PooledEstimates, PosteriorChain
from ..mcmc_engine.sampler_validation import SamplerValidationReport
from ..report_schemas.analysis_report.analysis_report_validator import analysis_report_validator
from ..report_schemas.bundle_manifest.bundle_manifest_validator import bundle_manifest_validator
from ..report_schemas.schema_check import check_document
from ..report_schemas.validation_report.validation_report_validator import validation_report_validator
from ..sroc.sroc_curve import export_grid_csv
from .figures import render_figures
from .utils import ensure_directory, sha256_file

logger = logging.getLogger(__name__)

DIAGNOSTICS_COLUMNS = (
    ("study_id", "label", "tp", "fp", "fn", "tn",
     "sens", "sens_lower", "sens_upper", "fpr", "fpr_lower", "fpr_upper")
    + STATISTIC_NAMES
    + tuple(f"flag_{name}" for name in FLAG_NAMES)
    + ("notes",)
)

POOLED_COLUMNS = (
    "analysis", "removed_ids", "n_studies",
    "sens", "sens_lower", "sens_upper",
    "fpr", "fpr_lower", "fpr_upper",
    "auc", "auc_lower", "auc_upper",
    "dor", "dor_lower", "dor_upper",
)


def _number(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def write_json(document: dict, path: Path) -> Path:
    path.write_text(json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_diagnostics_csv(result: AnalysisResult, dataset: Dataset, path: Path) -> Path:
    rows = []
    for record in result.records:
        study = dataset.get(record.study_id)
        sens, fpr = observed_proportions(study)
        (sens_lo, sens_hi), (fpr_lo, fpr_hi) = observed_proportion_intervals(study)
        row = [study.id, study.label, study.tp, study.fp, study.fn, study.tn]
        row += [_number(v) for v in (sens, sens_lo, sens_hi, fpr, fpr_lo, fpr_hi)]
        row += [_number(v) for v in record.statistics().values()]
        row += [int(record.flags.get(name, False)) for name in FLAG_NAMES]
        row.append(" | ".join(record.notes))
        rows.append(row)
    return _write_rows(path, DIAGNOSTICS_COLUMNS, rows)


def _pooled_row(label: str, removed: List[int], n_studies: int, pooled: PooledEstimates, auc: Estimate) -> list:
    row = [label, " ".join(str(i) for i in removed), n_studies]
    for estimate in (pooled.eta_a, pooled.eta_b, auc, pooled.dor):
        row += [_number(estimate.value), _number(estimate.lower), _number(estimate.upper)]
    return row


def write_pooled_csv(result: AnalysisResult, path: Path) -> Path:
    """First row: all studies. Then one row per flagging method that flagged anything."""
    sroc = result.sroc
    rows = [_pooled_row("all_studies", [], len(result.records), result.pooled,
                        Estimate(sroc.auc, sroc.auc_lower, sroc.auc_upper))]
    for refit in result.refits:
        rows.append(_pooled_row(f"without_{refit.method}", refit.removed_ids, refit.n_studies,
                                refit.pooled, refit.auc))
    return _write_rows(path, POOLED_COLUMNS, rows)


def write_summary_text(result: AnalysisResult, path: Path) -> Path:
    pooled = result.pooled
    lines = [
        f"Dataset: {result.dataset_name} ({len(result.records)} studies)",
        f"Pooled sensitivity {pooled.eta_a.value:.3f} [{pooled.eta_a.lower:.3f}, {pooled.eta_a.upper:.3f}]",
        f"Pooled FPR         {pooled.eta_b.value:.3f} [{pooled.eta_b.lower:.3f}, {pooled.eta_b.upper:.3f}]",
        f"DOR                {pooled.dor.value:.3f} [{pooled.dor.lower:.3f}, {pooled.dor.upper:.3f}]",
        f"AUC                {result.sroc.auc:.3f} [{result.sroc.auc_lower:.3f}, {result.sroc.auc_upper:.3f}]",
        f"Max R-hat          {result.summary.max_r_hat:.3f}",
        "",
        "Flagged studies:",
    ]
    for method in FLAGGING_METHODS:
        ids = result.flagged(method)
        lines.append(f"  {method:<22} {', '.join(map(str, ids)) if ids else '-'}")
    lines += [
        "",
        f"Note: {result.n_comparisons} comparisons ({len(result.records)} studies x {len(FLAG_NAMES)} criteria) "
        "were made without multiplicity correction.",
    ]
    for warning in result.summary.warnings:
        lines.append(f"Warning: {warning}")
    for study_id, message in sorted(result.failures.items()):
        lines.append(f"Failed leave-one-out fit for study {study_id}: {message}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_manifest(out_dir: Path, files: Sequence[Path]) -> Path:
    manifest = {
        "schema": 1,
        "files": {path.relative_to(out_dir).as_posix(): sha256_file(path) for path in sorted(files)},
    }
    check_document(manifest, bundle_manifest_validator, "manifest.json")
    return write_json(manifest, out_dir / "manifest.json")


def write_bundle(result: AnalysisResult, dataset: Dataset, out_dir, figures: bool = True,
                 chains: Optional[Sequence[PosteriorChain]] = None) -> List[Path]:
    """Write every report file plus the manifest. Returns all written paths, manifest last."""
    out_dir = ensure_directory(out_dir)

    document = result.to_dict()
    check_document(document, analysis_report_validator, "analysis.json")

    files = [
        write_json(document, out_dir / "analysis.json"),
        write_diagnostics_csv(result, dataset, out_dir / "diagnostics.csv"),
        write_pooled_csv(result, out_dir / "pooled.csv"),
        export_grid_csv(result.sroc, out_dir / "sroc_grid.csv"),
        write_summary_text(result, out_dir / "summary.txt"),
    ]
    if chains:
        files.append(export_chain_csv(chains, out_dir / "chains.csv"))
    if figures:
        files.extend(render_figures(result, dataset, out_dir))

    files.append(write_manifest(out_dir, files))
    logger.info("Report bundle written to %s (%d files)", out_dir, len(files))
    return files


def write_validation_report(report: SamplerValidationReport, out_dir) -> Path:
    out_dir = ensure_directory(out_dir)
    document = report.to_dict()
    check_document(document, validation_report_validator, "validation.json")
    return write_json(document, out_dir / "validation.json")
