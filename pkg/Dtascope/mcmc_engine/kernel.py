"""
Random-walk Metropolis building blocks shared by the bivariate sampler and the
sampler-validation harness.
"""
from typing import Callable, Optional

import numpy as np

SCALAR_TARGET_ACCEPTANCE = 0.44
BLOCK_TARGET_ACCEPTANCE = 0.30


class RandomWalkKernel:
    """Gaussian random-walk proposal with Metropolis acceptance."""

    def propose(self, current: np.ndarray, scale, rng: np.random.Generator) -> np.ndarray:
        return current + scale * rng.standard_normal(np.shape(current))

    def accept(self, log_ratio, rng: np.random.Generator):
        """Accept where log(U) < log_ratio. NaN ratios are rejected."""
        log_ratio = np.asarray(log_ratio, dtype=float)
        log_u = np.log(rng.random(log_ratio.shape))
        accepted = log_u < np.nan_to_num(log_ratio, nan=-np.inf)
        return accepted if accepted.ndim else bool(accepted)


class AdaptiveScale:
    """
    Proposal scale for a stack of independent blocks.

    `base` has one row per block (shape (size,) or (size, d)); the scale of
    block k is base[k] * exp(log_multiplier[k]). During burn-in the log
    multiplier moves by +/- min(0.25, 1/sqrt(w)) after window w, up when that
    window's acceptance exceeded `target` and down otherwise. After `freeze()`
    the scale is fixed and acceptance is counted for reporting.
    """

    def __init__(self, base, target: float, initial_log_multiplier: float = 0.0):
        self.base = np.atleast_1d(np.asarray(base, dtype=float)).copy()
        size = self.base.shape[0]
        self.target = target
        self.log_multiplier = np.full(size, initial_log_multiplier, dtype=float)
        self.adapting = True
        self._windows = 0
        self._window_accepts = np.zeros(size)
        self._window_trials = 0
        self._accepts = np.zeros(size)
        self._trials = 0

    @property
    def scale(self) -> np.ndarray:
        multiplier = np.exp(self.log_multiplier)
        return self.base * multiplier.reshape((-1,) + (1,) * (self.base.ndim - 1))

    def record(self, accepted) -> None:
        accepted = np.asarray(accepted, dtype=float)
        if self.adapting:
            self._window_accepts += accepted
            self._window_trials += 1
        else:
            self._accepts += accepted
            self._trials += 1

    def adapt(self) -> None:
        if not self.adapting or self._window_trials == 0:
            return
        self._windows += 1
        step = min(0.25, 1.0 / np.sqrt(self._windows))
        rate = self._window_accepts / self._window_trials
        self.log_multiplier += np.where(rate > self.target, step, -step)
        self._window_accepts[:] = 0.0
        self._window_trials = 0

    def freeze(self) -> None:
        self.adapting = False

    @property
    def acceptance_rate(self) -> float:
        """Mean post-freeze acceptance over the stacked blocks."""
        if self._trials == 0:
            return float("nan")
        return float(np.mean(self._accepts / self._trials))


def sample_target(
    log_density: Callable[[np.ndarray], float],
    initial: np.ndarray,
    iterations: int,
    burn_in: int,
    rng: np.random.Generator,
    kernel: Optional[RandomWalkKernel] = None,
    adapt_window: int = 50,
    base_scale=1.0,
):
    """
    Adaptive random-walk Metropolis on a single d-dimensional block.
    Returns (draws of shape (iterations - burn_in, d), post-burn-in acceptance rate).
    """
    kernel = kernel or RandomWalkKernel()
    x = np.asarray(initial, dtype=float).copy()
    d = x.size
    target = SCALAR_TARGET_ACCEPTANCE if d == 1 else BLOCK_TARGET_ACCEPTANCE
    base = np.broadcast_to(np.asarray(base_scale, dtype=float), (d,)).reshape(1, d)
    scale = AdaptiveScale(base, target, initial_log_multiplier=np.log(2.38 / np.sqrt(d)))

    log_p = log_density(x)
    draws = np.empty((iterations - burn_in, d))
    for i in range(iterations):
        if i == burn_in:
            scale.freeze()
        proposal = kernel.propose(x, scale.scale[0], rng)
        log_p_new = log_density(proposal)
        accepted = kernel.accept(log_p_new - log_p, rng)
        if accepted:
            x, log_p = proposal, log_p_new
        scale.record(accepted)
        if i < burn_in and (i + 1) % adapt_window == 0:
            scale.adapt()
        if i >= burn_in:
            draws[i - burn_in] = x
    return draws, scale.acceptance_rate
