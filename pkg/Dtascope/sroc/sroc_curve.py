"""
Summary ROC curve from the bivariate model.

The curve is the regression of logit sensitivity on logit FPR implied by the
fitted bivariate normal, back-transformed to the probability scale:

    sens(fpr) = expit(intercept + slope * logit(fpr)),
    slope = rho * sigma_a / sigma_b,  intercept = mu_a - slope * mu_b
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import expit, logit

from ..mcmc_engine.model_types import PARAM_NAMES, ModelParams, PosteriorChain
from ..mcmc_engine.pooled import pooled_draws, posterior_mean_params

logger = logging.getLogger(__name__)

GRID_SIZE = 1000
EPSILON = 1e-6
FULL_RANGE = (0.0, 1.0)
AUC_RANGE_MODES = ("full", "observed")
DRAW_CHUNK = 500


@dataclass(frozen=True)
class SrocLine:
    intercept: float
    slope: float


@dataclass(frozen=True)
class SrocCurve:
    intercept: float
    slope: float
    grid: np.ndarray  # (grid_size, 2): fpr, sensitivity
    auc: float
    fpr_range: Tuple[float, float]
    auc_lower: float = float("nan")
    auc_upper: float = float("nan")

    @property
    def line(self) -> SrocLine:
        return SrocLine(self.intercept, self.slope)

    def to_dict(self, include_grid: bool = False) -> dict:
        data = {
            "intercept": self.intercept,
            "slope": self.slope,
            "auc": self.auc,
            "auc_lower": _finite_or_none(self.auc_lower),
            "auc_upper": _finite_or_none(self.auc_upper),
            "fpr_range": list(self.fpr_range),
            "grid_size": int(self.grid.shape[0]),
        }
        if include_grid:
            data["grid"] = self.grid.tolist()
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "SrocCurve":
        line = SrocLine(data["intercept"], data["slope"])
        fpr_range = tuple(data["fpr_range"])
        grid = np.asarray(data["grid"]) if "grid" in data else sroc_points(line, data["grid_size"], fpr_range)
        return cls(
            intercept=line.intercept,
            slope=line.slope,
            grid=grid,
            auc=data["auc"],
            fpr_range=fpr_range,
            auc_lower=_none_to_nan(data.get("auc_lower")),
            auc_upper=_none_to_nan(data.get("auc_upper")),
        )


def _finite_or_none(value):
    return float(value) if value is not None and np.isfinite(value) else None


def _none_to_nan(value):
    return float("nan") if value is None else float(value)


def sroc_line(params: ModelParams) -> SrocLine:
    if not params.sigma_b > 0.0:
        raise ValueError("sigma_b must be positive to define the SROC line")
    slope = params.rho * params.sigma_a / params.sigma_b
    return SrocLine(intercept=params.mu_a - slope * params.mu_b, slope=slope)


def _check_range(fpr_range) -> Tuple[float, float]:
    lo, hi = float(fpr_range[0]), float(fpr_range[1])
    if not (0.0 <= lo < hi <= 1.0) or hi - lo <= 2 * EPSILON:
        raise ValueError(f"invalid FPR range {fpr_range}")
    return lo, hi


def fpr_grid(grid_size: int = GRID_SIZE, fpr_range=FULL_RANGE) -> np.ndarray:
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    lo, hi = _check_range(fpr_range)
    return np.linspace(lo + EPSILON, hi - EPSILON, grid_size)


def sroc_points(line: SrocLine, grid_size: int = GRID_SIZE, fpr_range=FULL_RANGE) -> np.ndarray:
    """(grid_size, 2) array of (fpr, sensitivity) on an equispaced FPR grid."""
    fpr = fpr_grid(grid_size, fpr_range)
    sens = expit(line.intercept + line.slope * logit(fpr))
    return np.column_stack([fpr, sens])


def _extended_area(fpr: np.ndarray, sens: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Trapezoid over the grid plus flat extensions to [lo, hi]. Works along the last axis."""
    inner = trapezoid(sens, fpr, axis=-1)
    return inner + (fpr[0] - lo) * sens[..., 0] + (hi - fpr[-1]) * sens[..., -1]


def auc(grid: np.ndarray, fpr_range=FULL_RANGE) -> float:
    """
    Area under the curve over `fpr_range`, divided by the range width so a
    restricted range still reads on the [0, 1] scale. Clamped to [0, 1].
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2 or grid.shape[0] < 2 or grid.shape[1] != 2:
        raise ValueError("grid must be an (n >= 2, 2) array")
    if np.any(np.diff(grid[:, 0]) <= 0.0):
        raise ValueError("grid FPR values must be strictly increasing")
    lo, hi = _check_range(fpr_range)
    area = _extended_area(grid[:, 0], grid[:, 1], lo, hi) / (hi - lo)
    return float(np.clip(area, 0.0, 1.0))


def delta_auc(full_auc: float, loo_auc: float) -> float:
    for value in (full_auc, loo_auc):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"AUC must lie in [0, 1], got {value}")
    return float(full_auc - loo_auc)


def auc_draws(xi: np.ndarray, grid_size: int = GRID_SIZE, fpr_range=FULL_RANGE) -> np.ndarray:
    """AUC of the SROC curve implied by every row of `xi` (draws, 5)."""
    xi = np.atleast_2d(xi)
    lo, hi = _check_range(fpr_range)
    fpr = fpr_grid(grid_size, fpr_range)
    logit_fpr = logit(fpr)

    mu_a, mu_b, sigma_a, sigma_b, rho = (xi[:, PARAM_NAMES.index(n)] for n in PARAM_NAMES)
    slope = rho * sigma_a / sigma_b
    intercept = mu_a - slope * mu_b

    out = np.empty(xi.shape[0])
    for start in range(0, xi.shape[0], DRAW_CHUNK):
        stop = start + DRAW_CHUNK
        sens = expit(intercept[start:stop, None] + slope[start:stop, None] * logit_fpr[None, :])
        out[start:stop] = _extended_area(fpr, sens, lo, hi) / (hi - lo)
    return np.clip(out, 0.0, 1.0)


def resolve_fpr_range(auc_range: str, observed_fpr: Optional[Sequence[float]] = None) -> Tuple[float, float]:
    if auc_range not in AUC_RANGE_MODES:
        raise ValueError(f"auc_range must be one of {AUC_RANGE_MODES}, got {auc_range!r}")
    if auc_range == "full":
        return FULL_RANGE
    if observed_fpr is None or len(observed_fpr) == 0:
        raise ValueError("observed FPR values are required for auc_range='observed'")
    return _check_range((min(observed_fpr), max(observed_fpr)))


def sroc_curve(chains: Sequence[PosteriorChain], grid_size: int = GRID_SIZE, auc_range: str = "full",
               observed_fpr: Optional[Sequence[float]] = None, interval: bool = True) -> SrocCurve:
    """Plug-in SROC curve and AUC at the posterior means, with a per-draw 95% interval for the AUC."""
    fpr_range = resolve_fpr_range(auc_range, observed_fpr)
    line = sroc_line(posterior_mean_params(chains))
    grid = sroc_points(line, grid_size, fpr_range)
    lower = upper = float("nan")
    if interval:
        per_draw = auc_draws(pooled_draws(chains), grid_size, fpr_range)
        lower, upper = np.quantile(per_draw, [0.025, 0.975])
    return SrocCurve(
        intercept=float(line.intercept),
        slope=float(line.slope),
        grid=grid,
        auc=auc(grid, fpr_range),
        fpr_range=fpr_range,
        auc_lower=float(lower),
        auc_upper=float(upper),
    )


def export_grid_csv(curve: SrocCurve, path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("fpr", "sens"))
        for fpr, sens in curve.grid:
            writer.writerow((repr(float(fpr)), repr(float(sens))))
    logger.debug("Wrote SROC grid to %s", path)
    return path
