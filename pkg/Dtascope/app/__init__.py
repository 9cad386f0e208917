import click

from Dtascope.app.config import Config
from Dtascope.app.utils import configure_logging


def create_app():
    """
    Application factory: builds the `dtascope` command group
    """
    # 1. Create the command group; logging is configured once per invocation
    @click.group(context_settings={"help_option_names": ["-h", "--help"]})
    @click.option("--log-level", default=None, help="Overrides DTA_LOG_LEVEL.")
    def app(log_level):
        """Bayesian bivariate meta-analysis of diagnostic accuracy with influence diagnostics."""
        configure_logging(log_level or Config.DTA_LOG_LEVEL)

    # 2. Import commands here to avoid circular imports
    from Dtascope.app.commands.analyze_commands import analyze_cmd
    from Dtascope.app.commands.simulate_commands import simulate_cmd
    from Dtascope.app.commands.validation_commands import validate_sampler_cmd

    # 3. Register commands
    app.add_command(analyze_cmd)
    app.add_command(simulate_cmd)
    app.add_command(validate_sampler_cmd)

    return app
