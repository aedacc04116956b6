"""Logging module for spinmem."""
from __future__ import annotations

import logging
import os
import re
from logging import LogRecord
from pathlib import Path
from typing import Any

from colorama import Fore, Style

from spinmem.log_cycle.json_handler import JsonFileHandler, JsonFormatter
from spinmem.singleton import Singleton


class Logger(metaclass=Singleton):
    """
    Logger that handles titles in different colors.
    Outputs logs in console, activity.log, and error.log.
    File handlers are attached once a log directory is known.
    """

    def __init__(self):
        console_formatter = SpinMemFormatter("%(title_color)s %(message)s")

        self.console_handler = ConsoleHandler()
        self.console_handler.setLevel(logging.DEBUG)
        self.console_handler.setFormatter(console_formatter)

        self.file_handler: logging.Handler | None = None
        self.error_handler: logging.Handler | None = None
        self.log_dir: Path | None = None

        self.logger = logging.getLogger("SPINMEM")
        self.logger.addHandler(self.console_handler)
        self.logger.setLevel(logging.INFO)
        self.logger.propagate = False

        self.json_logger = logging.getLogger("SPINMEM_JSON")
        self.json_logger.setLevel(logging.DEBUG)
        self.json_logger.propagate = False

    def set_log_dir(self, log_dir: str | Path) -> None:
        """Route activity.log and error.log into ``log_dir``."""
        log_dir = Path(log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)
        if self.log_dir == log_dir.resolve():
            return
        self._detach_file_handlers()

        self.file_handler = logging.FileHandler(
            os.path.join(log_dir, "activity.log"), "a", "utf-8"
        )
        self.file_handler.setLevel(logging.DEBUG)
        self.file_handler.setFormatter(
            SpinMemFormatter("%(asctime)s %(levelname)s %(title)s %(message_no_color)s")
        )

        self.error_handler = logging.FileHandler(
            os.path.join(log_dir, "error.log"), "a", "utf-8"
        )
        self.error_handler.setLevel(logging.ERROR)
        self.error_handler.setFormatter(
            SpinMemFormatter(
                "%(asctime)s %(levelname)s %(module)s:%(funcName)s:%(lineno)d %(title)s"
                " %(message_no_color)s"
            )
        )

        for handler in (self.file_handler, self.error_handler):
            self.logger.addHandler(handler)
            self.json_logger.addHandler(handler)
        self.log_dir = log_dir.resolve()

    def _detach_file_handlers(self) -> None:
        for handler in (self.file_handler, self.error_handler):
            if handler is None:
                continue
            self.logger.removeHandler(handler)
            self.json_logger.removeHandler(handler)
            handler.close()
        self.file_handler = self.error_handler = None
        self.log_dir = None

    def typewriter_log(
        self, title="", title_color="", content="", level=logging.INFO
    ) -> str:
        if content:
            if isinstance(content, list):
                content = " ".join(content)
        else:
            content = ""

        self.logger.log(
            level, content, extra={"title": str(title), "color": str(title_color)}
        )
        return f"{title}{content}\n"

    def debug(self, message, title="", title_color=""):
        self._log(title, title_color, message, logging.DEBUG)

    def info(self, message, title="", title_color=""):
        self._log(title, title_color, message, logging.INFO)

    def warn(self, message, title="", title_color=""):
        self._log(title, title_color or Fore.YELLOW, message, logging.WARN)

    def error(self, title, message=""):
        self._log(title, Fore.RED, message, logging.ERROR)

    def _log(
        self,
        title: str = "",
        title_color: str = "",
        message: str = "",
        level=logging.INFO,
    ):
        if message and isinstance(message, list):
            message = " ".join(message)
        self.logger.log(
            level, message, extra={"title": str(title), "color": str(title_color)}
        )

    def set_level(self, level):
        self.logger.setLevel(level)

    def log_json(self, data: Any, file_name: str) -> Path:
        """Write ``data`` as a JSON document into the log directory."""
        log_dir = self.get_log_directory()
        json_file_path = log_dir / file_name
        json_data_handler = JsonFileHandler(json_file_path)
        json_data_handler.setFormatter(JsonFormatter())

        self.json_logger.addHandler(json_data_handler)
        try:
            self.json_logger.debug(data)
        finally:
            self.json_logger.removeHandler(json_data_handler)
            json_data_handler.close()
        return json_file_path

    def get_log_directory(self) -> Path:
        if self.log_dir is None:
            self.set_log_dir(Path.cwd() / "logs")
        return self.log_dir


class ConsoleHandler(logging.StreamHandler):
    def emit(self, record) -> None:
        msg = self.format(record)
        try:
            print(msg)
        except Exception:
            self.handleError(record)


class SpinMemFormatter(logging.Formatter):
    """
    Allows to handle custom placeholders 'title_color' and 'message_no_color'.
    To use this formatter, make sure to pass 'color', 'title' as log extras.
    """

    def format(self, record: LogRecord) -> str:
        if hasattr(record, "color"):
            record.title_color = (
                getattr(record, "color")
                + getattr(record, "title", "")
                + " "
                + Style.RESET_ALL
            )
        else:
            record.title_color = getattr(record, "title", "")

        record.title = getattr(record, "title", "")

        if hasattr(record, "msg"):
            record.message_no_color = remove_color_codes(str(getattr(record, "msg")))
        else:
            record.message_no_color = ""
        return super().format(record)


def remove_color_codes(s: str) -> str:
    ansi_escape = re.compile(r"\x1B(?:[@-Z\\-_]|\[[0-?]*[ -/]*[@-~])")
    return ansi_escape.sub("", s)


logger = Logger()
