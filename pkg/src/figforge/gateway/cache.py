"""Content-addressed reply cache: one canonical-JSON file per key."""
from __future__ import annotations

import json
import threading
from pathlib import Path

from .model import CacheKey, ModelReply


class ReplyCache:
    """Filesystem cache keyed by CacheKey digest.

    Values are canonical JSON so cached runs diff cleanly; writes go through
    a temp file + rename so a killed run never leaves a torn entry.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, key: CacheKey) -> Path:
        return self.directory / key.digest

    def get(self, key: CacheKey) -> ModelReply | None:
        path = self._path(key)
        with self._lock:
            if not path.exists():
                return None
            raw = path.read_text(encoding="utf-8")
        return ModelReply.from_json(json.loads(raw))

    def put(self, key: CacheKey, reply: ModelReply) -> None:
        payload = json.dumps(reply.to_json(), sort_keys=True, ensure_ascii=False)
        path = self._path(key)
        tmp = path.with_suffix(".tmp")
        with self._lock:
            tmp.write_text(payload, encoding="utf-8")
            tmp.replace(path)

    def contains(self, key: CacheKey) -> bool:
        with self._lock:
            return self._path(key).exists()
