import copy
import json

import numpy as np
import pytest

from Dtascope.app.services import RunConfig, analyze
from Dtascope.core_data.csv_loader import write_csv
from Dtascope.core_data.study_records import StudyRecord
from Dtascope.exceptions import FitFailure
from Dtascope.influence_diagnostics import Influence_Agent
from Dtascope.influence_diagnostics.bayesian_pvalues import PValueConfig, bayesian_pvalues
from Dtascope.influence_diagnostics.Influence_Agent import InfluenceAnalyzer, loo_seed
from Dtascope.influence_diagnostics.records import FLAG_NAMES, FLAGGING_METHODS, AnalysisResult
from Dtascope.influence_diagnostics.relative_distance import relative_distances
from Dtascope.mcmc_engine.model_types import PosteriorChain

from .conftest import QUICK_MCMC

SMALL_PVALUES = PValueConfig(outer_draws=200, inner_reps=50, seed=3)


def _flag_only(result, flag, ids):
    for record in result.records:
        record.flags = {name: False for name in FLAG_NAMES}
        record.flags[flag] = record.study_id in ids


def test_one_record_per_study(quick_analysis, small_dataset):
    _, result = quick_analysis
    assert [r.study_id for r in result.records] == small_dataset.ids
    assert result.complete
    assert result.failures == {}
    assert result.n_comparisons == len(small_dataset) * len(FLAG_NAMES)


def test_fit_plan_seeds(quick_analysis, small_dataset):
    analyzer, result = quick_analysis
    plan = analyzer.fit_plan()
    assert plan[0][0] is None and plan[0][2].seed == QUICK_MCMC.seed
    assert [key for key, _, _ in plan[1:]] == small_dataset.ids
    assert plan[2][2].seed == QUICK_MCMC.seed + 2000
    assert result.metadata["seeds"]["leave_one_out"]["3"] == loo_seed(QUICK_MCMC.seed, 3)


def test_statistics_are_consistent_with_loo_fits(quick_analysis):
    _, result = quick_analysis
    for record in result.records:
        rd = relative_distances(result.pooled, result.loo_pooled[record.study_id])
        assert record.srd == pytest.approx(rd.srd)
        assert record.rd_dor == pytest.approx(rd.rd_dor)
        assert record.delta_auc == pytest.approx(result.sroc.auc - result.loo_auc[record.study_id])
        assert record.ssr >= 0.0
        for name in ("p_a", "p_b", "p_sd", "p_ad", "p_dor"):
            assert 0.0 <= getattr(record, name) <= 1.0


def test_pvalues_are_reproducible(quick_fit, small_dataset):
    chains, _ = quick_fit
    study = small_dataset.studies[0]
    assert bayesian_pvalues(study, chains, SMALL_PVALUES) == bayesian_pvalues(study, chains, SMALL_PVALUES)


def test_far_outlying_study_has_small_pvalues(quick_fit):
    chains, _ = quick_fit
    outlier = StudyRecord(id=99, tp=199, fp=190, fn=1, tn=10)
    pvalues = bayesian_pvalues(outlier, chains, SMALL_PVALUES)
    assert pvalues.n_draws == 200
    assert pvalues.p_sd < 0.05
    assert pvalues.p_ad < 0.05


def _chain_with_effects(xi, theta_i, study_id=1, draws=400):
    return PosteriorChain(xi=np.tile(xi, (draws, 1)), theta=np.tile([[theta_i]], (draws, 1, 1)),
                          acceptance_rates={}, chain_index=0, study_ids=(study_id,))


LOGIT_80 = float(np.log(4.0))


def test_pvalues_read_the_study_own_effects():
    study = StudyRecord(id=1, tp=40, fp=10, fn=10, tn=40)
    hyper = [LOGIT_80, -LOGIT_80, 1.0, 1.0, 0.0]

    centred = bayesian_pvalues(study, [_chain_with_effects(hyper, [LOGIT_80, -LOGIT_80])], SMALL_PVALUES)
    assert centred.p_sd > 0.8 and centred.p_a > 0.7 and centred.p_ad > 0.7
    assert centred.notes == []

    # same hyperparameters, but the study's own effects sit at 50% / 50%
    shifted = bayesian_pvalues(study, [_chain_with_effects(hyper, [0.0, 0.0])], SMALL_PVALUES)
    assert shifted.p_sd < 0.05 and shifted.p_a < 0.05 and shifted.p_b < 0.05


def test_study_outside_the_fit_is_scored_as_new_study():
    study = StudyRecord(id=7, tp=40, fp=10, fn=10, tn=40)
    chain = _chain_with_effects([LOGIT_80, -LOGIT_80, 0.3, 0.3, 0.0], [0.0, 0.0], study_id=1)
    pvalues = bayesian_pvalues(study, [chain], SMALL_PVALUES)
    assert pvalues.p_sd > 0.5
    assert any("new study" in note for note in pvalues.notes)


def test_analysis_result_round_trip(quick_analysis):
    _, result = quick_analysis
    document = json.loads(json.dumps(result.to_dict(), allow_nan=False))
    assert "timings" not in document
    restored = AnalysisResult.from_dict(document)
    assert restored.to_dict() == result.to_dict()
    assert restored.flagged("relative_distance") == result.flagged("srd")
    with pytest.raises(KeyError):
        result.flagged("unknown")
    assert "timings" in result.to_dict(include_timings=True)


def test_full_fit_failure_keeps_leave_one_out_fits(small_dataset, prior, monkeypatch):
    real_run_chain = Influence_Agent.run_chain

    def fail_on_full_data(dataset, *args, **kwargs):
        if len(dataset) == len(small_dataset):
            raise RuntimeError("sampler exploded")
        return real_run_chain(dataset, *args, **kwargs)

    monkeypatch.setattr(Influence_Agent, "run_chain", fail_on_full_data)
    analyzer = InfluenceAnalyzer(small_dataset, prior, QUICK_MCMC, pvalue_config=SMALL_PVALUES, n_jobs=1)
    result = analyzer.run()

    assert "sampler exploded" in result.full_fit_failure
    assert result.summary is None and result.pooled is None and result.sroc is None
    assert result.failures == {}
    assert sorted(result.loo_pooled) == small_dataset.ids
    assert sorted(result.loo_auc) == small_dataset.ids
    for record in result.records:
        assert record.ssr is not None
        assert record.srd is None and record.p_sd is None and record.delta_auc is None
        assert any("full-data fit failed" in note for note in record.notes)
    assert not result.complete

    document = json.loads(json.dumps(result.to_dict(), allow_nan=False))
    assert AnalysisResult.from_dict(document).to_dict() == result.to_dict()


def test_analyze_raises_on_full_fit_failure_without_bundle(small_dataset, tmp_path, monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("sampler exploded")

    monkeypatch.setattr(Influence_Agent, "run_chain", broken)
    table = tmp_path / "small.csv"
    write_csv(small_dataset, table)
    out_dir = tmp_path / "report"
    config = RunConfig(input_path=table, output_dir=out_dir, mcmc=QUICK_MCMC, pvalues=SMALL_PVALUES, n_jobs=1)
    with pytest.raises(FitFailure) as info:
        analyze(config)
    assert info.value.study_id is None
    assert not (out_dir / "analysis.json").exists()


def test_failed_leave_one_out_fit_is_reported(small_dataset, prior, monkeypatch):
    real_run_chain = Influence_Agent.run_chain

    def fail_without_study_3(dataset, *args, **kwargs):
        if 3 not in dataset.ids:
            raise RuntimeError("no finite start")
        return real_run_chain(dataset, *args, **kwargs)

    monkeypatch.setattr(Influence_Agent, "run_chain", fail_without_study_3)
    analyzer = InfluenceAnalyzer(small_dataset, prior, QUICK_MCMC, pvalue_config=SMALL_PVALUES, n_jobs=1)
    result = analyzer.run()

    assert list(result.failures) == [3]
    record = result.record(3)
    assert record.srd is None and record.delta_auc is None
    assert record.p_sd is not None
    assert not record.flags["srd"]
    assert any("leave-one-out fit failed" in note for note in record.notes)
    assert not result.complete
    assert 3 not in result.loo_pooled


def test_sensitivity_refits_remove_flagged_sets(quick_analysis, small_dataset):
    analyzer, result = quick_analysis
    result = copy.deepcopy(result)
    _flag_only(result, "srd", {1, 2})
    result.record(3).flags["dauc"] = True
    for study_id in (1, 2, 4):
        result.record(study_id).flags["dauc"] = True

    refits = analyzer.sensitivity_refits(result)
    # the ΔAUC set would leave a single study and is skipped
    assert [r.method for r in refits] == ["relative_distance"]
    assert refits[0].removed_ids == [1, 2]
    assert refits[0].n_studies == len(small_dataset) - 2
    assert result.refits == refits
    assert 0.0 <= refits[0].auc.value <= 1.0


def test_refit_order_follows_flagging_methods(quick_analysis):
    analyzer, result = quick_analysis
    result = copy.deepcopy(result)
    _flag_only(result, "dauc", {5})
    result.record(1).flags["srd"] = True
    refits = analyzer.sensitivity_refits(result)
    order = list(FLAGGING_METHODS)
    assert [r.method for r in refits] == sorted((r.method for r in refits), key=order.index)
    assert [r.removed_ids for r in refits] == [[1], [5]]


def test_refit_failure_raises(quick_analysis, monkeypatch):
    analyzer, result = quick_analysis
    result = copy.deepcopy(result)
    _flag_only(result, "ssr", {2})

    def broken(*args, **kwargs):
        raise RuntimeError("sampler exploded")

    monkeypatch.setattr(Influence_Agent, "run_chain", broken)
    with pytest.raises(FitFailure):
        analyzer.sensitivity_refits(result)
