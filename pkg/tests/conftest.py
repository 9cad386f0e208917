from pathlib import Path

import pytest

import Dtascope
from Dtascope.core_data.csv_loader import load_csv
from Dtascope.core_data.simulator import simulate_dataset
from Dtascope.influence_diagnostics.bayesian_pvalues import PValueConfig
from Dtascope.influence_diagnostics.Influence_Agent import InfluenceAnalyzer
from Dtascope.mcmc_engine.Mcmc_Engine import run_mcmc
from Dtascope.mcmc_engine.model_types import McmcConfig, ModelParams, PriorSpec

CASE_STUDY_CSV = Path(Dtascope.__file__).parent / "data" / "vur_ultrasound.csv"

# smallest configuration the sampler accepts: 500 retained draws per chain
QUICK_MCMC = McmcConfig(iterations=1500, burn_in=500, thin=2, chains=2, seed=11)

TRUE_PARAMS = ModelParams(mu_a=0.8, mu_b=-1.2, sigma_a=0.6, sigma_b=0.5, rho=-0.3)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the full-length case-study acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def case_study():
    return load_csv(CASE_STUDY_CSV)


@pytest.fixture(scope="session")
def small_dataset():
    return simulate_dataset(TRUE_PARAMS, [(60, 90), (120, 150), (45, 80), (200, 210), (90, 60)],
                            seed=3, name="small")


@pytest.fixture(scope="session")
def prior():
    return PriorSpec()


@pytest.fixture(scope="session")
def quick_fit(small_dataset, prior):
    """(chains, summary) of the quick configuration on the small dataset."""
    return run_mcmc(small_dataset, prior, QUICK_MCMC, n_jobs=1)


@pytest.fixture(scope="session")
def quick_analysis(small_dataset, prior):
    """(analyzer, result) of a full influence run at quick settings."""
    analyzer = InfluenceAnalyzer(small_dataset, prior, QUICK_MCMC,
                                 pvalue_config=PValueConfig(outer_draws=200, inner_reps=50, seed=3), n_jobs=1)
    return analyzer, analyzer.run()
