"""Main script for the spinmem package."""
import sys

import click

COMMANDS = {
    "distribution": "Frequency and coupling bins of the spin ensemble.",
    "schedule": "Timing table and sampled control waveforms.",
    "run": "Single-mode store and retrieve with channel metrics.",
    "multimode": "Multi-mode storage with the cross-talk matrix.",
    "metrics": "Channel metrics over the input grid and the power sweep.",
    "oracle": "Moment equations against the master-equation reference.",
}


@click.group()
@click.option(
    "--config",
    "-C",
    "config_file",
    type=click.Path(dir_okay=False),
    help="YAML or JSON run configuration; the reference defaults when omitted.",
)
@click.option(
    "--out",
    "-o",
    default="spinmem-out",
    show_default=True,
    help="Output directory for tables, summaries, logs and the result cache.",
)
@click.option(
    "--workers",
    "-w",
    type=int,
    help="Worker processes for independent runs (overrides SPINMEM_WORKERS).",
)
@click.option(
    "--seed",
    type=click.IntRange(0, 2**64 - 1),
    help="Seed for Monte-Carlo coupling sampling (overrides the config).",
)
@click.option("--debug", is_flag=True, help="Enable Debug Mode")
@click.pass_context
def main(
    ctx: click.Context,
    config_file: str | None,
    out: str,
    workers: int | None,
    seed: int | None,
    debug: bool,
) -> None:
    """
    Simulate a spin-ensemble microwave memory and export its results.
    """
    ctx.ensure_object(dict)
    ctx.obj.update(
        config_file=config_file, out=out, workers=workers, seed=seed, debug=debug
    )


def _dispatch(ctx: click.Context, name: str) -> None:
    # Put imports inside function to avoid importing everything when starting the CLI
    from spinmem import main as commands
    from spinmem.configurator import create_config
    from spinmem.errors import SpinMemError
    from spinmem.logs import logger
    from spinmem.workspace import Workspace

    try:
        run_config, workspace = create_config(**ctx.obj)
    except SpinMemError as e:
        logger.error("Configuration rejected: ", e.message)
        for line in e.details.get("errors", []):
            logger.error("  ", line)
        Workspace(ctx.obj["out"]).write_error(e)
        sys.exit(commands.EXIT_ERROR)
    command = getattr(commands, f"cmd_{name}")
    sys.exit(commands.run_command(command, run_config, workspace))


def _register(name: str, help_text: str) -> None:
    @main.command(name=name, help=help_text)
    @click.pass_context
    def command(ctx: click.Context) -> None:
        _dispatch(ctx, name)


for _name, _help in COMMANDS.items():
    _register(_name, _help)


if __name__ == "__main__":
    main()
