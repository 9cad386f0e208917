import logging
from pathlib import Path

import click
from pydantic import ValidationError

from ...exceptions import DatasetValidationError, FitFailure, SamplerInitError
from ...influence_diagnostics.records import FLAGGING_METHODS, Thresholds
from ...mcmc_engine.model_types import McmcConfig
from ..config import Config
from ..services import RunConfig, analyze
from ..utils import EXIT_FIT_FAILURE, EXIT_INPUT_ERROR, EXIT_OK

logger = logging.getLogger(__name__)


def build_mcmc_config(fast, seed, iterations, burn_in, thin, chains) -> McmcConfig:
    """Start from the full or the --fast profile and apply any explicit overrides."""
    base = McmcConfig.fast(seed) if fast else McmcConfig(seed=seed)
    overrides = {"iterations": iterations, "burn_in": burn_in, "thin": thin, "chains": chains}
    values = base.model_dump()
    values.update({k: v for k, v in overrides.items() if v is not None})
    return McmcConfig(**values)


@click.command("analyze")
@click.option("--input", "input_path", required=True, type=click.Path(path_type=Path), help="Study table (CSV).")
@click.option("--out", "output_dir", type=click.Path(path_type=Path), default=None,
              help="Output directory for the report bundle.")
@click.option("--iters", "iterations", type=int, default=None, help="MCMC iterations per chain.")
@click.option("--burnin", "burn_in", type=int, default=None, help="Burn-in iterations per chain.")
@click.option("--thin", type=int, default=None, help="Keep every n-th post-burn-in draw.")
@click.option("--chains", type=int, default=None, help="Chains per fit.")
@click.option("--seed", type=int, default=None, help="Base seed for every fit.")
@click.option("--thr-srd", type=float, default=Thresholds().srd, show_default=True)
@click.option("--thr-ssr", type=float, default=Thresholds().ssr, show_default=True)
@click.option("--thr-pval", type=float, default=Thresholds().p_value, show_default=True)
@click.option("--thr-dauc", type=float, default=Thresholds().delta_auc, show_default=True)
@click.option("--thr-rd-dor", type=float, default=Thresholds().rd_dor, show_default=True)
@click.option("--auc-range", type=click.Choice(["full", "observed"]), default="full", show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True, help="Write the SVG figures.")
@click.option("--chains-csv", "export_chains", is_flag=True, help="Also dump the full-data chains.")
@click.option("--fast", is_flag=True, help="Reduced MCMC profile (12000 iterations, 2000 burn-in, 2 chains).")
@click.option("--threads", type=int, default=None, help="Parallel workers (default: DTA_THREADS or all cores).")
@click.pass_context
def analyze_cmd(ctx, input_path, output_dir, iterations, burn_in, thin, chains, seed,
                thr_srd, thr_ssr, thr_pval, thr_dauc, thr_rd_dor, auc_range, figures, export_chains, fast, threads):
    """Fit the model, run every influence diagnostic and write the report bundle."""
    try:
        run_config = RunConfig(
            input_path=input_path,
            output_dir=output_dir or Path(Config.DTA_OUTPUT_DIR),
            mcmc=build_mcmc_config(fast, Config.DTA_SEED if seed is None else seed,
                                   iterations, burn_in, thin, chains),
            thresholds=Thresholds(srd=thr_srd, ssr=thr_ssr, p_value=thr_pval,
                                  delta_auc=thr_dauc, rd_dor=thr_rd_dor),
            figures=figures,
            export_chains=export_chains,
            auc_range=auc_range,
            n_jobs=threads,
        )
    except ValidationError as e:
        raise click.UsageError(str(e))

    try:
        result, files = analyze(run_config)
    except DatasetValidationError as e:
        click.echo(f"Error: {e}", err=True)
        ctx.exit(EXIT_INPUT_ERROR)
    except OSError as e:
        click.echo(f"Error: {e}", err=True)
        ctx.exit(EXIT_INPUT_ERROR)
    except (FitFailure, SamplerInitError) as e:
        logger.error("Analysis failed: %s", e)
        click.echo(f"Error: {e}", err=True)
        ctx.exit(EXIT_FIT_FAILURE)

    pooled = result.pooled
    click.echo(f"Pooled sensitivity {pooled.eta_a.value:.3f}, FPR {pooled.eta_b.value:.3f}, "
               f"DOR {pooled.dor.value:.2f}, AUC {result.sroc.auc:.3f}")
    for method in FLAGGING_METHODS:
        click.echo(f"  {method}: {result.flagged(method) or '-'}")
    click.echo(f"{len(files)} files written to {run_config.output_dir}")

    if result.failures:
        click.echo(f"Error: {len(result.failures)} leave-one-out fits failed; see summary.txt", err=True)
        ctx.exit(EXIT_FIT_FAILURE)
    ctx.exit(EXIT_OK)
