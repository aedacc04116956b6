"""Sidecar cache for expensive protocol tuning results.

Stores the optimized swap time, the effective cavity time and calibrated pulse
amplitudes keyed by a checksum of the configuration subset they depend on.
"""
from __future__ import annotations

import dataclasses
import hashlib
from pathlib import Path
from typing import Any, Callable, Dict

import orjson

from spinmem.logs import logger

CACHE_FILE_NAME = "spinmem_cache.json"
SAVE_OPTIONS = orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2


def config_checksum(tag: str, subset: Any) -> str:
    """Get the hex checksum of a tag plus a JSON-serializable config subset."""
    payload = orjson.dumps(
        {"tag": tag, "subset": subset},
        option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY,
    )
    return hashlib.md5(payload).hexdigest()


@dataclasses.dataclass
class CacheContent:
    entries: Dict[str, Any] = dataclasses.field(default_factory=dict)


class ResultCache:
    """A JSON file holding tuning results across runs."""

    def __init__(self, cache_dir: str | Path) -> None:
        self.filename = Path(cache_dir) / CACHE_FILE_NAME
        self.data = CacheContent()
        if self.filename.exists():
            try:
                self.data = CacheContent(**orjson.loads(self.filename.read_bytes()))
            except (orjson.JSONDecodeError, TypeError) as e:
                logger.warn(f"Discarding unreadable cache {self.filename}: {e}")

    def get(self, tag: str, subset: Any) -> Any | None:
        return self.data.entries.get(config_checksum(tag, subset))

    def put(self, tag: str, subset: Any, value: Any) -> None:
        self.data.entries[config_checksum(tag, subset)] = value
        self.filename.parent.mkdir(parents=True, exist_ok=True)
        with open(self.filename, "wb") as f:
            f.write(orjson.dumps(self.data, option=SAVE_OPTIONS))

    def get_or_compute(self, tag: str, subset: Any, compute: Callable[[], Any]) -> Any:
        cached = self.get(tag, subset)
        if cached is not None:
            logger.debug(f"cache hit for {tag}")
            return cached
        value = compute()
        self.put(tag, subset, value)
        return value

    def clear(self) -> None:
        self.data = CacheContent()
        if self.filename.exists():
            self.filename.unlink()

    def __len__(self) -> int:
        return len(self.data.entries)
