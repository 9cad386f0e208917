import logging
from pathlib import Path

import click
from pydantic import ValidationError

from ...core_data.csv_loader import write_csv
from ...core_data.simulator import simulate_dataset
from ...core_data.study_records import MIN_STUDIES
from ...mcmc_engine.model_types import ModelParams
from ..config import Config

logger = logging.getLogger(__name__)


def parse_sizes(text: str):
    """'120:80,95:60' -> [(120, 80), (95, 60)]"""
    sizes = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            n_a, n_b = (int(part) for part in chunk.split(":"))
        except ValueError:
            raise click.BadParameter(f"expected N_A:N_B, got {chunk!r}", param_hint="--sizes")
        sizes.append((n_a, n_b))
    if len(sizes) < MIN_STUDIES:
        raise click.BadParameter(f"at least {MIN_STUDIES} study sizes are required", param_hint="--sizes")
    return sizes


@click.command("simulate")
@click.option("--mu-a", type=float, required=True, help="Mean logit sensitivity.")
@click.option("--mu-b", type=float, required=True, help="Mean logit false-positive rate.")
@click.option("--sigma-a", type=float, required=True)
@click.option("--sigma-b", type=float, required=True)
@click.option("--rho", type=float, default=0.0, show_default=True)
@click.option("--studies", "n_studies", type=click.IntRange(min=MIN_STUDIES), default=10, show_default=True)
@click.option("--n-a", type=click.IntRange(min=1), default=100, show_default=True, help="Diseased per study.")
@click.option("--n-b", type=click.IntRange(min=1), default=100, show_default=True, help="Non-diseased per study.")
@click.option("--sizes", default=None, help="Per-study sizes as N_A:N_B pairs; overrides --studies/--n-a/--n-b.")
@click.option("--seed", type=int, default=None)
@click.option("--out", "output_path", required=True, type=click.Path(path_type=Path, dir_okay=False))
def simulate_cmd(mu_a, mu_b, sigma_a, sigma_b, rho, n_studies, n_a, n_b, sizes, seed, output_path):
    """Generate a synthetic study table from known parameters."""
    try:
        params = ModelParams(mu_a=mu_a, mu_b=mu_b, sigma_a=sigma_a, sigma_b=sigma_b, rho=rho)
    except ValidationError as e:
        raise click.UsageError(str(e))

    study_sizes = parse_sizes(sizes) if sizes else [(n_a, n_b)] * n_studies
    seed = Config.DTA_SEED if seed is None else seed
    dataset = simulate_dataset(params, study_sizes, seed=seed, name=output_path.stem)
    write_csv(dataset, output_path)
    logger.info("Wrote %d simulated studies to %s", len(dataset), output_path)
    click.echo(f"{len(dataset)} studies written to {output_path}")
