"""
=========
Workspace
=========

The workspace is the output directory of one spinmem command: result tables,
summaries, the resolved configuration, logs and the result cache.

"""
from __future__ import annotations

from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from spinmem.errors import SpinMemError
from spinmem.export import write_columns, write_csv, write_json
from spinmem.logs import logger

CACHE_DIR_NAME = ".cache"
ERROR_FILE_NAME = "error.json"


class Workspace:
    """An output directory that confines every generated path to its root."""

    NULL_BYTES = ["\0", "%00"]

    def __init__(self, workspace_root: str | Path, restrict_to_workspace: bool = True):
        self._root = self.make_workspace(workspace_root)
        self._restrict_to_workspace = restrict_to_workspace
        self.written: list[Path] = []

    @property
    def root(self) -> Path:
        return self._root

    @property
    def cache_dir(self) -> Path:
        """Default location of the result cache."""
        return self._root / CACHE_DIR_NAME

    @classmethod
    def make_workspace(cls, workspace_directory: str | Path) -> Path:
        """Create the output directory if needed and return its resolved path."""
        workspace_directory = cls._sanitize_path(workspace_directory)
        workspace_directory.mkdir(exist_ok=True, parents=True)
        return workspace_directory

    def get_path(self, relative_path: str | Path) -> Path:
        """Resolve ``relative_path`` inside the workspace.

        Raises
        ------
        ValueError
            If the path is absolute or escapes the workspace root.
        """
        return self._sanitize_path(
            relative_path,
            root=self.root,
            restrict_to_root=self._restrict_to_workspace,
        )

    def _track(self, path: Path) -> Path:
        self.written.append(path)
        logger.debug(f"wrote {path.relative_to(self.root)}")
        return path

    def write_table(self, name: str, columns: dict[str, np.ndarray]) -> Path:
        """Write named columns of equal length to ``name``."""
        return self._track(write_columns(self.get_path(name), columns))

    def write_rows(
        self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
    ) -> Path:
        return self._track(write_csv(self.get_path(name), header, rows))

    def write_summary(self, name: str, data: Any) -> Path:
        return self._track(write_json(self.get_path(name), data))

    def write_error(self, error: SpinMemError) -> Path:
        """Record a failed command as machine-readable JSON."""
        return self.write_summary(ERROR_FILE_NAME, error.to_dict())

    @staticmethod
    def _sanitize_path(
        relative_path: str | Path,
        root: str | Path | None = None,
        restrict_to_root: bool = True,
    ) -> Path:
        for null_byte in Workspace.NULL_BYTES:
            if null_byte in str(relative_path) or null_byte in str(root):
                raise ValueError("embedded null byte")

        if root is None:
            return Path(relative_path).resolve()

        root, relative_path = Path(root).resolve(), Path(relative_path)

        if relative_path.is_absolute():
            raise ValueError(
                f"Attempted to access absolute path '{relative_path}'"
                f" in workspace '{root}'."
            )

        full_path = root.joinpath(relative_path).resolve()

        if restrict_to_root and not full_path.is_relative_to(root):
            raise ValueError(
                f"Attempted to access path '{full_path}' outside of workspace '{root}'."
            )

        return full_path
