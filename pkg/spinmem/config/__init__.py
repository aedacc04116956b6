"""
This module contains the configuration classes for spinmem.
"""
from spinmem.config.config import Config
from spinmem.config.run_config import RunConfig

__all__ = [
    "Config",
    "RunConfig",
]
