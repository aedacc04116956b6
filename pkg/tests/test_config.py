"""
Test cases for the Config class, which holds the process-wide settings
and ensures it behaves as a singleton.
"""
from pathlib import Path

from spinmem.config import Config
from spinmem.config.config import is_valid_int


def test_initial_values(config):
    """
    Test if the initial values of the Config class attributes are set correctly.
    """
    assert config.debug_mode == False
    assert config.workers == 1
    assert config.cache_dir.name == ".cache"


def test_config_is_singleton(config):
    """
    Test that every Config() call returns the same instance.
    """
    assert Config() is config


def test_set_debug_mode(config):
    """
    Test if the set_debug_mode() method updates the debug_mode attribute.
    """
    # Store debug mode to reset it after the test
    debug_mode = config.debug_mode

    config.set_debug_mode(True)
    assert config.debug_mode == True

    # Reset debug mode
    config.set_debug_mode(debug_mode)


def test_set_workers(config):
    """
    Test if the set_workers() method updates the workers attribute
    and keeps it positive.
    """
    workers = config.workers

    config.set_workers(4)
    assert config.workers == 4
    config.set_workers(0)
    assert config.workers == 1

    config.set_workers(workers)


def test_set_directories(config, tmp_path):
    """
    Test if the directory setters store paths.
    """
    cache_dir, log_dir = config.cache_dir, config.log_dir

    config.set_cache_dir(str(tmp_path / "cache"))
    config.set_log_dir(tmp_path / "logs")
    config.set_output_path(tmp_path)
    assert config.cache_dir == tmp_path / "cache"
    assert isinstance(config.log_dir, Path)
    assert config.output_path == tmp_path

    config.set_cache_dir(cache_dir)
    config.set_log_dir(log_dir)


def test_is_valid_int():
    assert is_valid_int("8")
    assert not is_valid_int("eight")
    assert not is_valid_int(None)
