import math

import numpy as np
import pytest

from Dtascope.core_data.study_records import ObservedLogits
from Dtascope.influence_diagnostics.classification import classify
from Dtascope.influence_diagnostics.records import FLAG_NAMES, InfluenceRecord, Thresholds
from Dtascope.influence_diagnostics.relative_distance import relative_distances
from Dtascope.influence_diagnostics.residuals import standardized_residuals
from Dtascope.mcmc_engine.model_types import Estimate, PooledEstimates
from Dtascope.posterior_predictive.moments import PredictiveMoments


def _pooled(eta_a, eta_b, mu_a_mean, mu_b_mean):
    point = lambda v: Estimate(v, v, v)  # noqa: E731
    return PooledEstimates(eta_a=point(eta_a), eta_b=point(eta_b), dor=point(1.0), lr_pos=point(1.0),
                           lr_neg=point(1.0), mu_a_mean=mu_a_mean, mu_b_mean=mu_b_mean)


def _moments(mean=(0.0, 0.0), cov=((1.0, 0.0), (0.0, 1.0)), mean_log_dor=0.0, var_log_dor=2.0):
    return PredictiveMoments(mean=np.array(mean), cov=np.array(cov), mean_log_dor=mean_log_dor,
                             var_log_dor=var_log_dor, n_replicates=1000)


def test_relative_distances():
    full = _pooled(0.44, 0.22, 0.0, -1.0)
    loo = _pooled(0.40, 0.25, 0.2, -1.0)
    rd = relative_distances(full, loo)
    assert rd.rd_a == pytest.approx(0.04 / 0.44)
    assert rd.rd_b == pytest.approx(0.03 / 0.22)
    assert rd.srd == pytest.approx(math.hypot(0.04, 0.03) / math.hypot(0.44, 0.22))
    assert rd.ard == pytest.approx((rd.rd_a + rd.rd_b) / 2)
    assert rd.rd_dor == pytest.approx(abs(math.exp(1.0) - math.exp(1.2)) / math.exp(1.0))


def test_identical_fits_have_zero_distance():
    full = _pooled(0.44, 0.22, 0.0, -1.0)
    assert relative_distances(full, full) == (0.0, 0.0, 0.0, 0.0, 0.0)


def test_standardized_residuals():
    y = ObservedLogits(y_a=2.0, y_b=-1.0, corrected=False)
    residuals = standardized_residuals(y, y.log_dor, _moments(cov=((4.0, 0.0), (0.0, 1.0))))
    assert residuals.sr_a == pytest.approx(1.0)
    assert residuals.sr_b == pytest.approx(-1.0)
    assert residuals.ssr == pytest.approx(2.0)
    assert residuals.asr == pytest.approx(1.0)
    assert residuals.sr_dor == pytest.approx(3.0 / math.sqrt(2.0))
    assert residuals.notes == []


def test_residuals_vanish_at_predictive_mean():
    y = ObservedLogits(y_a=0.5, y_b=-0.5, corrected=False)
    residuals = standardized_residuals(y, y.log_dor, _moments(mean=(0.5, -0.5), mean_log_dor=1.0))
    assert residuals.ssr == 0.0
    assert residuals.sr_a == 0.0 and residuals.sr_dor == 0.0


def test_singular_covariance_leaves_ssr_missing():
    y = ObservedLogits(y_a=1.0, y_b=1.0, corrected=False)
    residuals = standardized_residuals(y, 0.0, _moments(cov=((1.0, 1.0), (1.0, 1.0))))
    assert residuals.ssr is None
    assert residuals.sr_a == pytest.approx(1.0)
    assert any("ssr missing" in note for note in residuals.notes)


def test_zero_variance_leaves_residual_missing():
    y = ObservedLogits(y_a=1.0, y_b=1.0, corrected=False)
    residuals = standardized_residuals(y, 0.0, _moments(cov=((0.0, 0.0), (0.0, 1.0))))
    assert residuals.sr_a is None and residuals.asr is None
    assert residuals.sr_b == pytest.approx(1.0)


def _record(**values):
    defaults = dict(srd=0.01, ssr=1.0, rd_dor=0.01, delta_auc=0.0, p_sd=0.5, p_ad=0.5, p_dor=0.5)
    defaults.update(values)
    return InfluenceRecord(study_id=1, **defaults)


def test_quiet_study_is_not_flagged():
    flags, notes = classify(_record(), Thresholds())
    assert flags == {name: False for name in FLAG_NAMES}
    assert notes == []


def test_comparisons_are_strict_except_auc():
    thresholds = Thresholds()
    flags, _ = classify(_record(srd=0.05, ssr=4.61, rd_dor=0.05, delta_auc=-0.02), thresholds)
    assert flags == {"srd": False, "ssr": False, "pvalue": False, "rd_dor": False, "dauc": True}
    flags, _ = classify(_record(srd=0.0501, ssr=4.62, rd_dor=0.0501, delta_auc=0.0199), thresholds)
    assert flags == {"srd": True, "ssr": True, "pvalue": False, "rd_dor": True, "dauc": False}


def test_pvalue_flag_uses_smallest_synthetic_pvalue():
    flags, _ = classify(_record(p_sd=0.4, p_ad=0.1, p_dor=0.9), Thresholds())
    assert flags["pvalue"]
    flags, _ = classify(_record(p_sd=0.15, p_ad=0.2, p_dor=0.9), Thresholds())
    assert not flags["pvalue"]


def test_missing_statistic_leaves_flag_unset():
    flags, notes = classify(_record(ssr=None), Thresholds())
    assert flags["ssr"] is False
    assert any(note.startswith("ssr") for note in notes)


@pytest.mark.parametrize("missing", ["p_sd", "p_ad", "p_dor"])
def test_any_missing_synthetic_pvalue_leaves_pvalue_flag_unset(missing):
    values = {"p_sd": 0.01, "p_ad": 0.01, "p_dor": 0.01, missing: None}
    flags, notes = classify(_record(**values), Thresholds())
    assert flags["pvalue"] is False
    assert any(note.startswith("pvalue flag unset") for note in notes)


def test_custom_thresholds():
    flags, _ = classify(_record(srd=0.08), Thresholds(srd=0.1))
    assert not flags["srd"]
