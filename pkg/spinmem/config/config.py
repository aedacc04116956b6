"""Environment-level configuration shared by every command."""
from __future__ import annotations

import os
from pathlib import Path

from dotenv import load_dotenv

from spinmem.singleton import Singleton


def is_valid_int(value: str) -> bool:
    """Check if the value is a valid integer

    Args:
        value (str): The value to check

    Returns:
        bool: True if the value is a valid integer, False otherwise
    """
    try:
        int(value)
        return True
    except (TypeError, ValueError):
        return False


load_dotenv(verbose=True)


class Config(metaclass=Singleton):
    """
    Process-wide settings read from the environment (and a ``.env`` file).

    CLI flags override these through the ``set_*`` methods, see
    ``spinmem.configurator.create_config``.
    """

    def __init__(self) -> None:
        """Initialize the Config class"""
        self.debug_mode = os.getenv("SPINMEM_DEBUG", "False") == "True"

        workers = os.getenv("SPINMEM_WORKERS", "1")
        self.workers = int(workers) if is_valid_int(workers) else 1

        cache_dir = os.getenv("SPINMEM_CACHE_DIR")
        self.cache_dir = Path(cache_dir) if cache_dir else None
        # otherwise every command caches inside its own output directory
        self.cache_dir_from_env = bool(cache_dir)

        log_dir = os.getenv("SPINMEM_LOG_DIR")
        self.log_dir = Path(log_dir) if log_dir else None

        self.output_path: Path | None = None

    def set_debug_mode(self, value: bool) -> None:
        """Set the debug mode value."""
        self.debug_mode = value

    def set_workers(self, value: int) -> None:
        """Set the size of the worker pool used for independent runs."""
        self.workers = max(1, int(value))

    def set_cache_dir(self, value: str | Path | None) -> None:
        """Set the directory holding the result cache."""
        self.cache_dir = Path(value) if value is not None else None

    def set_log_dir(self, value: str | Path | None) -> None:
        """Set the directory for activity.log and error.log."""
        self.log_dir = Path(value) if value is not None else None

    def set_output_path(self, value: str | Path) -> None:
        """Set the output directory of the current command."""
        self.output_path = Path(value)
