"""Configurator module."""
from __future__ import annotations

import logging
from pathlib import Path

import click
from colorama import Fore

from spinmem.config import Config, RunConfig
from spinmem.logs import logger
from spinmem.workspace import Workspace

global_config = Config()


def create_config(
    config_file: str | None,
    out: str,
    workers: int | None,
    seed: int | None,
    debug: bool,
) -> tuple[RunConfig, Workspace]:
    """Updates the global config with the CLI flags and loads the run configuration.

    Args:
        config_file (str): Path to the YAML or JSON run configuration
        out (str): Output directory of the command
        workers (int): Size of the worker pool, overriding SPINMEM_WORKERS
        seed (int): Seed overriding the one in the run configuration
        debug (bool): Whether to enable debug mode

    Returns:
        The run configuration and the output workspace.
    """
    if debug:
        logger.typewriter_log("Debug Mode: ", Fore.GREEN, "ENABLED")
        global_config.set_debug_mode(True)
    if global_config.debug_mode:
        logger.set_level(logging.DEBUG)

    if workers is not None:
        if workers < 1:
            raise click.UsageError("--workers must be at least 1")
        global_config.set_workers(workers)
    if global_config.workers > 1:
        logger.typewriter_log("Workers: ", Fore.GREEN, f"{global_config.workers}")

    workspace = Workspace(out)
    global_config.set_output_path(workspace.root)
    if not global_config.cache_dir_from_env:
        global_config.set_cache_dir(workspace.cache_dir)
    logger.set_log_dir(global_config.log_dir or workspace.root / "logs")

    if config_file:
        if not Path(config_file).exists():
            raise click.BadParameter(
                f"{config_file} wasn't found", param_hint="--config"
            )
        logger.typewriter_log("Using Run Config File: ", Fore.GREEN, config_file)
    else:
        logger.typewriter_log("Using Run Config: ", Fore.YELLOW, "reference defaults")

    run_config = RunConfig.load(config_file, seed=seed)
    if seed is not None:
        logger.typewriter_log("Seed: ", Fore.GREEN, f"{seed}")
    return run_config, workspace
