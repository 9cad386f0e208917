import logging
import math
from typing import List, NamedTuple, Optional

from ..core_data.study_records import ObservedLogits
from ..exceptions import SingularCovarianceError
from ..posterior_predictive.discrepancies import discrepancy_synthetic
from ..posterior_predictive.moments import PredictiveMoments

logger = logging.getLogger(__name__)


class StandardizedResiduals(NamedTuple):
    sr_a: Optional[float]
    sr_b: Optional[float]
    ssr: Optional[float]
    asr: Optional[float]
    sr_dor: Optional[float]
    notes: List[str]


def _signed(value: float, mean: float, variance: float) -> Optional[float]:
    if not variance > 0.0:
        return None
    return (value - mean) / math.sqrt(variance)


def standardized_residuals(y: ObservedLogits, log_dor_obs: float, moments: PredictiveMoments) -> StandardizedResiduals:
    """Observed logits against the leave-one-out predictive distribution of the same study."""
    notes = []
    sr_a = _signed(y.y_a, moments.mean[0], moments.var_a)
    sr_b = _signed(y.y_b, moments.mean[1], moments.var_b)
    sr_dor = _signed(log_dor_obs, moments.mean_log_dor, moments.var_log_dor)
    for name, value in (("sr_a", sr_a), ("sr_b", sr_b), ("sr_dor", sr_dor)):
        if value is None:
            notes.append(f"{name} missing: zero predictive variance")

    try:
        ssr = discrepancy_synthetic((y.y_a, y.y_b), moments.mean, moments.cov)
    except SingularCovarianceError as exc:
        logger.warning("SSR not computed: %s", exc)
        notes.append(f"ssr missing: {exc}")
        ssr = None

    asr = (abs(sr_a) + abs(sr_b)) / 2.0 if sr_a is not None and sr_b is not None else None
    return StandardizedResiduals(sr_a=sr_a, sr_b=sr_b, ssr=ssr, asr=asr, sr_dor=sr_dor, notes=notes)
