import math
from typing import NamedTuple

from ..mcmc_engine.model_types import PooledEstimates


class RelativeDistances(NamedTuple):
    rd_a: float
    rd_b: float
    srd: float
    ard: float
    rd_dor: float


def relative_distances(full: PooledEstimates, loo: PooledEstimates) -> RelativeDistances:
    """
    Relative change of the back-transformed pooled estimates when one study is
    deleted. Working on the probability scale keeps the denominators away from 0.
    """
    eta_a, eta_b = full.eta_a.value, full.eta_b.value
    delta_a = eta_a - loo.eta_a.value
    delta_b = eta_b - loo.eta_b.value

    rd_a = abs(delta_a / eta_a)
    rd_b = abs(delta_b / eta_b)
    srd = math.hypot(delta_a, delta_b) / math.hypot(eta_a, eta_b)

    dor_full = math.exp(full.mu_a_mean - full.mu_b_mean)
    dor_loo = math.exp(loo.mu_a_mean - loo.mu_b_mean)
    rd_dor = abs(dor_full - dor_loo) / dor_full
    return RelativeDistances(rd_a=rd_a, rd_b=rd_b, srd=srd, ard=(rd_a + rd_b) / 2.0, rd_dor=rd_dor)
