"""Content-addressed result cache with atomic writes and checksummed entries."""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Optional

from . import __version__

ENV = "COBARFORGE_CACHE"


def default_dir() -> Path:
    env = os.environ.get(ENV)
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "cobarforge"


def fingerprint(command: str, inputs: Any, mode: str, conventions: str, version: str = __version__) -> str:
    blob = json.dumps({"command": command, "inputs": inputs, "mode": mode, "conventions": conventions,
                       "version": version}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


class Cache:
    """Each entry holds the sha256 of its payload on the first line; a mismatch is a miss and evicts."""

    def __init__(self, root: Optional[Path] = None):
        self.root = Path(root) if root is not None else default_dir()

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.out"

    def lookup(self, key: str) -> Optional[bytes]:
        path = self._path(key)
        try:
            raw = path.read_bytes()
        except OSError:
            return None
        head, sep, payload = raw.partition(b"\n")
        if not sep or hashlib.sha256(payload).hexdigest().encode() != head:
            try:
                path.unlink()
            except OSError:
                pass
            return None
        return payload

    def store(self, key: str, payload: bytes) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(hashlib.sha256(payload).hexdigest().encode() + b"\n" + payload)
            os.replace(tmp, self._path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
