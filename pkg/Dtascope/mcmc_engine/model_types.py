"""
Parameter, prior and sampler-configuration types for the bivariate
binomial / logit-normal random-effects model.

    TP_i ~ Bin(n_Ai, expit(theta_Ai)),  FP_i ~ Bin(n_Bi, expit(theta_Bi))
    theta_i ~ N(mu, Sigma),  Sigma = [[s_A^2, r s_A s_B], [r s_A s_B, s_B^2]]
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveFloat, PositiveInt, model_validator
from scipy.special import expit

PARAM_NAMES: Tuple[str, ...] = ("mu_a", "mu_b", "sigma_a", "sigma_b", "rho")

MIN_RETAINED_DRAWS = 500


class ModelParams(BaseModel):
    """Hyperparameters xi = (mu_a, mu_b, sigma_a, sigma_b, rho) on the logit scale."""
    model_config = ConfigDict(frozen=True)

    mu_a: float = Field(allow_inf_nan=False)
    mu_b: float = Field(allow_inf_nan=False)
    sigma_a: PositiveFloat = Field(allow_inf_nan=False)
    sigma_b: PositiveFloat = Field(allow_inf_nan=False)
    rho: float = Field(gt=-1.0, lt=1.0)

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mu_a, self.mu_b])

    @property
    def covariance(self) -> np.ndarray:
        off = self.rho * self.sigma_a * self.sigma_b
        return np.array([[self.sigma_a ** 2, off], [off, self.sigma_b ** 2]])

    def as_vector(self) -> np.ndarray:
        return np.array([self.mu_a, self.mu_b, self.sigma_a, self.sigma_b, self.rho])

    @classmethod
    def from_vector(cls, values) -> "ModelParams":
        return cls(**{name: float(v) for name, v in zip(PARAM_NAMES, values)})


class PriorSpec(BaseModel):
    """
    mu_a, mu_b ~ N(mu_mean, mu_sd^2); sigma_a, sigma_b ~ U(0, sigma_upper);
    rho ~ U(rho_lower, rho_upper).
    """
    model_config = ConfigDict(frozen=True)

    mu_mean: float = 0.0
    mu_sd: PositiveFloat = 10.0
    sigma_upper: PositiveFloat = 10.0
    rho_lower: float = Field(default=-1.0, ge=-1.0, le=1.0)
    rho_upper: float = Field(default=1.0, ge=-1.0, le=1.0)

    @model_validator(mode="after")
    def _check_rho_bounds(self) -> "PriorSpec":
        if not self.rho_lower < self.rho_upper:
            raise ValueError("rho_lower must be smaller than rho_upper")
        return self

    def log_density(self, params: ModelParams) -> float:
        if not (0.0 < params.sigma_a < self.sigma_upper and 0.0 < params.sigma_b < self.sigma_upper):
            return -math.inf
        if not self.rho_lower < params.rho < self.rho_upper:
            return -math.inf
        z = (np.array([params.mu_a, params.mu_b]) - self.mu_mean) / self.mu_sd
        log_mu = float(-0.5 * np.sum(z ** 2) - 2 * math.log(self.mu_sd) - math.log(2 * math.pi))
        return log_mu - 2 * math.log(self.sigma_upper) - math.log(self.rho_upper - self.rho_lower)

    def draw(self, rng: np.random.Generator) -> ModelParams:
        """One draw of xi from the prior."""
        mu = rng.normal(self.mu_mean, self.mu_sd, size=2)
        sigma = rng.uniform(0.0, self.sigma_upper, size=2)
        sigma = np.maximum(sigma, 1e-6)
        lower = max(self.rho_lower, -1 + 1e-9)
        upper = min(self.rho_upper, 1 - 1e-9)
        rho = rng.uniform(lower, upper)
        return ModelParams(mu_a=mu[0], mu_b=mu[1], sigma_a=sigma[0], sigma_b=sigma[1], rho=rho)


class McmcConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    iterations: PositiveInt = 120_000
    burn_in: NonNegativeInt = 20_000
    thin: PositiveInt = 10
    chains: PositiveInt = 3
    seed: NonNegativeInt = 2020
    adapt_window: PositiveInt = 50

    @model_validator(mode="after")
    def _check_retained(self) -> "McmcConfig":
        if self.burn_in >= self.iterations:
            raise ValueError("burn_in must be smaller than iterations")
        if self.retained_draws < MIN_RETAINED_DRAWS:
            raise ValueError(
                f"(iterations - burn_in) / thin = {self.retained_draws} retained draws per chain; "
                f"at least {MIN_RETAINED_DRAWS} are required"
            )
        return self

    @property
    def retained_draws(self) -> int:
        return (self.iterations - self.burn_in) // self.thin

    @classmethod
    def fast(cls, seed: int = 2020) -> "McmcConfig":
        """Reduced profile for CI and quick looks."""
        return cls(iterations=12_000, burn_in=2_000, thin=10, chains=2, seed=seed)

    def with_seed(self, seed: int) -> "McmcConfig":
        return self.model_copy(update={"seed": seed})


@dataclass(frozen=True)
class RandomEffects:
    """Study-level logits theta_i = (theta_Ai, theta_Bi), shape (N, 2)."""
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim != 2 or theta.shape[1] != 2:
            raise ValueError(f"theta must have shape (N, 2), got {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("random effects must be finite")
        object.__setattr__(self, "theta", theta)

    def __len__(self) -> int:
        return self.theta.shape[0]

    @property
    def p_a(self) -> np.ndarray:
        return expit(self.theta[:, 0])

    @property
    def p_b(self) -> np.ndarray:
        return expit(self.theta[:, 1])


@dataclass(frozen=True)
class PosteriorChain:
    """
    Retained (post-burn-in, thinned) draws of one chain.

    `xi` has one row per draw with columns PARAM_NAMES; `theta` is (draws, N, 2)
    or None when random effects were not kept.
    """
    xi: np.ndarray
    theta: Optional[np.ndarray]
    acceptance_rates: Dict[str, float]
    chain_index: int
    study_ids: Tuple[int, ...] = ()

    @property
    def n_draws(self) -> int:
        return self.xi.shape[0]

    def param(self, name: str) -> np.ndarray:
        return self.xi[:, PARAM_NAMES.index(name)]

    def params_at(self, k: int) -> ModelParams:
        return ModelParams.from_vector(self.xi[k])

    def effects_at(self, k: int) -> RandomEffects:
        if self.theta is None:
            raise ValueError("random effects were not retained for this chain")
        return RandomEffects(self.theta[k])

    @property
    def draws(self) -> Iterator[Tuple[ModelParams, Optional[RandomEffects]]]:
        for k in range(self.n_draws):
            yield self.params_at(k), (None if self.theta is None else RandomEffects(self.theta[k]))


@dataclass(frozen=True)
class ParameterSummary:
    mean: float
    sd: float
    q025: float
    q975: float
    r_hat: float
    ess: float
    mcse: float


@dataclass(frozen=True)
class PosteriorSummary:
    parameters: Dict[str, ParameterSummary]
    n_chains: int
    n_draws: int
    warnings: List[str] = field(default_factory=list)

    @property
    def max_r_hat(self) -> float:
        values = [p.r_hat for p in self.parameters.values() if np.isfinite(p.r_hat)]
        return max(values) if values else float("nan")

    def to_dict(self) -> dict:
        return {
            "n_chains": self.n_chains,
            "n_draws": self.n_draws,
            "warnings": list(self.warnings),
            "parameters": {
                name: {k: _json_float(v) for k, v in vars(p).items()} for name, p in self.parameters.items()
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PosteriorSummary":
        parameters = {
            name: ParameterSummary(**{k: (float("nan") if v is None else v) for k, v in values.items()})
            for name, values in data["parameters"].items()
        }
        return cls(parameters=parameters, n_chains=data["n_chains"], n_draws=data["n_draws"],
                   warnings=list(data.get("warnings", [])))


@dataclass(frozen=True)
class Estimate:
    """Point estimate with a 95% credible interval."""
    value: float
    lower: float
    upper: float

    def to_dict(self) -> dict:
        return {"value": self.value, "lower": self.lower, "upper": self.upper}

    @classmethod
    def from_dict(cls, data: dict) -> "Estimate":
        return cls(value=data["value"], lower=data["lower"], upper=data["upper"])


@dataclass(frozen=True)
class PooledEstimates:
    eta_a: Estimate
    eta_b: Estimate
    dor: Estimate
    lr_pos: Estimate
    lr_neg: Estimate
    mu_a_mean: float
    mu_b_mean: float

    def to_dict(self) -> dict:
        return {
            "eta_a": self.eta_a.to_dict(),
            "eta_b": self.eta_b.to_dict(),
            "dor": self.dor.to_dict(),
            "lr_pos": self.lr_pos.to_dict(),
            "lr_neg": self.lr_neg.to_dict(),
            "mu_a_mean": self.mu_a_mean,
            "mu_b_mean": self.mu_b_mean,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PooledEstimates":
        return cls(
            eta_a=Estimate.from_dict(data["eta_a"]),
            eta_b=Estimate.from_dict(data["eta_b"]),
            dor=Estimate.from_dict(data["dor"]),
            lr_pos=Estimate.from_dict(data["lr_pos"]),
            lr_neg=Estimate.from_dict(data["lr_neg"]),
            mu_a_mean=data["mu_a_mean"],
            mu_b_mean=data["mu_b_mean"],
        )


def _json_float(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value
