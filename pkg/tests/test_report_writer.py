import copy
import csv
import json
import xml.etree.ElementTree as ET

import pytest

from Dtascope.app.figures import FIGURE_FILES, dauc_panel_data, distance_panels, sroc_panel_sets
from Dtascope.app.report_writer import (
    DIAGNOSTICS_COLUMNS,
    POOLED_COLUMNS,
    write_bundle,
    write_validation_report,
)
from Dtascope.app.utils import sha256_file
from Dtascope.influence_diagnostics.classification import classify
from Dtascope.influence_diagnostics.records import AnalysisResult, Thresholds
from Dtascope.mcmc_engine.sampler_validation import AnalyticCheck, SamplerValidationReport, SbcCheck


@pytest.fixture(scope="module")
def bundle(quick_analysis, small_dataset, tmp_path_factory):
    analyzer, result = quick_analysis
    out_dir = tmp_path_factory.mktemp("bundle")
    files = write_bundle(result, small_dataset, out_dir, chains=analyzer.full_chains)
    return out_dir, files, result


def _rows(path):
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def test_bundle_contents(bundle):
    out_dir, files, _ = bundle
    names = {path.name for path in files}
    assert {"analysis.json", "diagnostics.csv", "pooled.csv", "sroc_grid.csv", "summary.txt",
            "chains.csv", "manifest.json"} <= names
    assert set(FIGURE_FILES) <= names
    assert files[-1].name == "manifest.json"


def test_manifest_hashes_every_other_file(bundle):
    out_dir, files, _ = bundle
    manifest = json.loads((out_dir / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["schema"] == 1
    assert set(manifest["files"]) == {path.name for path in files[:-1]}
    for name, digest in manifest["files"].items():
        assert sha256_file(out_dir / name) == digest


def test_analysis_json_reads_back(bundle):
    out_dir, _, result = bundle
    restored = AnalysisResult.from_dict(json.loads((out_dir / "analysis.json").read_text(encoding="utf-8")))
    assert restored.study_ids == result.study_ids
    assert [r.flags for r in restored.records] == [r.to_dict()["flags"] for r in result.records]


def test_diagnostics_csv(bundle, small_dataset):
    out_dir, _, _ = bundle
    rows = _rows(out_dir / "diagnostics.csv")
    assert tuple(rows[0]) == DIAGNOSTICS_COLUMNS
    assert [int(row[0]) for row in rows[1:]] == small_dataset.ids


def test_pooled_csv_rows(bundle):
    out_dir, _, result = bundle
    rows = _rows(out_dir / "pooled.csv")
    assert tuple(rows[0]) == POOLED_COLUMNS
    assert rows[1][0] == "all_studies"
    assert len(rows) == 2 + len(result.refits)


def test_summary_mentions_multiplicity(bundle):
    out_dir, _, result = bundle
    text = (out_dir / "summary.txt").read_text(encoding="utf-8")
    assert f"{result.n_comparisons} comparisons" in text
    assert "multiplicity" in text


def test_figures_are_valid_svg(bundle):
    out_dir, _, _ = bundle
    for name in FIGURE_FILES:
        root = ET.parse(out_dir / name).getroot()
        assert root.tag == "{http://www.w3.org/2000/svg}svg"


def test_figures_are_deterministic(quick_analysis, small_dataset, tmp_path):
    _, result = quick_analysis
    first = write_bundle(result, small_dataset, tmp_path / "a")
    second = write_bundle(result, small_dataset, tmp_path / "b")
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes()


def test_figure_panel_layout(quick_analysis):
    _, result = quick_analysis
    assert len(distance_panels(result)) == 10
    sets = sroc_panel_sets(result)
    assert sets[0][1] == []
    assert len(sets) == 6


def test_dauc_bars_highlight_exactly_the_flagged_studies(quick_analysis):
    _, result = quick_analysis
    result = copy.deepcopy(result)
    thresholds = Thresholds(**result.metadata["thresholds"])
    edges = [thresholds.delta_auc, -thresholds.delta_auc, 0.5 * thresholds.delta_auc, 0.0, 2 * thresholds.delta_auc]
    for record, value in zip(result.records, edges):
        record.delta_auc = value

    data = dauc_panel_data(result)
    for record, (study_id, value) in zip(result.records, data.bars):
        assert study_id == record.study_id
        assert data.highlighted(value) == classify(record, thresholds)[0]["dauc"]
    assert [data.highlighted(v) for _, v in data.bars] == [True, True, False, False, True]

    srd = distance_panels(result)[2]
    assert not srd.highlighted(thresholds.srd)


def test_existing_file_is_not_a_directory(quick_analysis, small_dataset, tmp_path):
    _, result = quick_analysis
    target = tmp_path / "taken"
    target.write_text("x")
    with pytest.raises(OSError):
        write_bundle(result, small_dataset, target)


def test_validation_report(tmp_path):
    report = SamplerValidationReport(
        seed=1, reps=20,
        analytic=[AnalyticCheck("mean_a", 1.01, 1.0, 0.02)],
        analytic_acceptance=0.3,
        sbc=[SbcCheck("mu_a", [2] * 10, 3.0, 0.9)],
    )
    path = write_validation_report(report, tmp_path)
    document = json.loads(path.read_text(encoding="utf-8"))
    assert path.name == "validation.json"
    assert document["passed"] is True
    assert document["analytic"]["checks"][0]["passed"] is True
