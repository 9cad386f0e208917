import numpy as np

from ..exceptions import SingularCovarianceError

SINGULAR_RELATIVE_DET = 1e-12


def discrepancy_marginal(y: float, m: float, v: float) -> float:
    """(y - m)^2 / v."""
    if not v > 0.0:
        raise ValueError(f"variance must be positive, got {v}")
    return float((y - m) ** 2 / v)


def discrepancy_synthetic(y, m, cov) -> float:
    """(y - m)' cov^-1 (y - m) for a 2x2 covariance."""
    cov = np.asarray(cov, dtype=float)
    d = np.asarray(y, dtype=float) - np.asarray(m, dtype=float)
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0]
    if not det > SINGULAR_RELATIVE_DET * cov[0, 0] * cov[1, 1] or not det > 0.0:
        raise SingularCovarianceError(det)
    # closed-form 2x2 inverse
    quad = (cov[1, 1] * d[0] ** 2 - (cov[0, 1] + cov[1, 0]) * d[0] * d[1] + cov[0, 0] * d[1] ** 2) / det
    return float(max(quad, 0.0))


def discrepancy_average(y, m, v_a: float, v_b: float) -> float:
    """Sum of the two marginal discrepancies."""
    return discrepancy_marginal(y[0], m[0], v_a) + discrepancy_marginal(y[1], m[1], v_b)


def synthetic_batch(d: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """
    Row-wise quadratic forms for d (K, 2) and cov (K, 2, 2). Rows whose
    covariance fails the singularity guard come back as NaN.
    """
    det = cov[:, 0, 0] * cov[:, 1, 1] - cov[:, 0, 1] * cov[:, 1, 0]
    valid = (det > SINGULAR_RELATIVE_DET * cov[:, 0, 0] * cov[:, 1, 1]) & (det > 0.0)
    safe_det = np.where(valid, det, 1.0)
    quad = (cov[:, 1, 1] * d[:, 0] ** 2 - (cov[:, 0, 1] + cov[:, 1, 0]) * d[:, 0] * d[:, 1]
            + cov[:, 0, 0] * d[:, 1] ** 2) / safe_det
    return np.where(valid, np.maximum(quad, 0.0), np.nan)
