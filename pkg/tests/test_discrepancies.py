import numpy as np
import pytest

from Dtascope.exceptions import SingularCovarianceError
from Dtascope.posterior_predictive.discrepancies import (
    discrepancy_average,
    discrepancy_marginal,
    discrepancy_synthetic,
    synthetic_batch,
)


def test_marginal():
    assert discrepancy_marginal(3.0, 1.0, 4.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        discrepancy_marginal(1.0, 0.0, 0.0)


def test_synthetic_matches_linear_solve():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = rng.normal(size=(2, 2))
        cov = a @ a.T + 0.1 * np.eye(2)
        y, m = rng.normal(size=2), rng.normal(size=2)
        d = y - m
        assert discrepancy_synthetic(y, m, cov) == pytest.approx(float(d @ np.linalg.solve(cov, d)))


def test_synthetic_is_zero_at_mean_and_non_negative():
    cov = np.array([[1.0, 0.3], [0.3, 2.0]])
    assert discrepancy_synthetic([0.5, -0.5], [0.5, -0.5], cov) == 0.0
    assert discrepancy_synthetic([2.0, 1.0], [0.0, 0.0], cov) >= 0.0


def test_singular_covariance():
    with pytest.raises(SingularCovarianceError):
        discrepancy_synthetic([1.0, 1.0], [0.0, 0.0], [[1.0, 1.0], [1.0, 1.0]])


def test_average_is_sum_of_marginals():
    assert discrepancy_average([1.0, 2.0], [0.0, 0.0], 1.0, 4.0) == pytest.approx(2.0)


def test_batch_marks_singular_rows():
    cov = np.array([np.eye(2), [[1.0, 1.0], [1.0, 1.0]]])
    d = np.array([[1.0, 2.0], [1.0, 1.0]])
    out = synthetic_batch(d, cov)
    assert out[0] == pytest.approx(5.0)
    assert np.isnan(out[1])
