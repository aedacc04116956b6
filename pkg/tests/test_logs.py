import logging

import orjson
import pytest

from spinmem.logs import logger, remove_color_codes


@pytest.mark.parametrize(
    "raw_text, clean_text",
    [
        (
            "Pulse calibration \x1b[36ma_max=0.41\x1b[0m  P_peak=\x1b[36m100 uW\x1b[0m",
            "Pulse calibration a_max=0.41  P_peak=100 uW",
        ),
        ("", ""),
        ("hello", "hello"),
        ("hello\x1B[31m world", "hello world"),
        ("\x1B[36mHello,\x1B[32m World!", "Hello, World!"),
        (
            "\x1B[1m\x1B[31mError:\x1B[0m\x1B[31m timing infeasible",
            "Error: timing infeasible",
        ),
    ],
)
def test_remove_color_codes(raw_text, clean_text):
    assert remove_color_codes(raw_text) == clean_text


def test_log_files(tmp_path):
    logger.set_log_dir(tmp_path)
    logger.info("T_swap=73.70 ns", title="Swap optimization")
    logger.error("Configuration rejected: ", "invalid run configuration")

    activity = (tmp_path / "activity.log").read_text()
    errors = (tmp_path / "error.log").read_text()
    assert "Swap optimization T_swap=73.70 ns" in activity
    assert "invalid run configuration" in errors
    assert "T_swap" not in errors


def test_debug_messages_follow_level(tmp_path):
    logger.set_log_dir(tmp_path)
    logger.set_level(logging.INFO)
    logger.debug("hidden detail")
    logger.set_level(logging.DEBUG)
    logger.debug("visible detail")
    logger.set_level(logging.INFO)

    activity = (tmp_path / "activity.log").read_text()
    assert "hidden detail" not in activity
    assert "visible detail" in activity


def test_log_json(tmp_path):
    logger.set_log_dir(tmp_path)
    path = logger.log_json({"gain": 0.79, "var_sum": 1.11}, "summary.json")
    assert path == tmp_path.resolve() / "summary.json"
    assert orjson.loads(path.read_bytes()) == {"gain": 0.79, "var_sum": 1.11}


def test_typewriter_log_returns_line():
    assert logger.typewriter_log("Workers: ", "", "4") == "Workers: 4\n"
