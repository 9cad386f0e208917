from pathlib import Path

import click

from ...mcmc_engine.sampler_validation import MIN_SBC_REPS, validate_sampler
from ..config import Config
from ..report_writer import write_validation_report
from ..utils import EXIT_OK, EXIT_VALIDATION_FAILED


@click.command("validate-sampler")
@click.option("--seed", type=int, default=None)
@click.option("--reps", type=click.IntRange(min=MIN_SBC_REPS), default=100, show_default=True,
              help="Simulation-based calibration replications.")
@click.option("--out", "output_dir", type=click.Path(path_type=Path, file_okay=False), default=None)
@click.option("--threads", type=int, default=None)
@click.pass_context
def validate_sampler_cmd(ctx, seed, reps, output_dir, threads):
    """Check the sampler against a known target and by simulation-based calibration."""
    seed = Config.DTA_SEED if seed is None else seed
    report = validate_sampler(seed, reps=reps, n_jobs=threads)
    path = write_validation_report(report, output_dir or Path(Config.DTA_OUTPUT_DIR))

    for check in report.analytic:
        click.echo(f"analytic {check.name}: {'ok' if check.passed else 'FAIL'}")
    for check in report.sbc:
        click.echo(f"SBC {check.parameter}: p={check.p_value:.3f} {'ok' if check.passed else 'FAIL'}")
    click.echo(f"Report written to {path}")
    ctx.exit(EXIT_OK if report.passed else EXIT_VALIDATION_FAILED)
