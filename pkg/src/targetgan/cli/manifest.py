"""Run manifests: what was run, on which inputs, with which seed."""

from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

import numpy as np


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def config_digest(config: Mapping) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str).encode()
    return "sha256:" + hashlib.sha256(blob).hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None
    inputs: dict[str, str]
    tool_version: str
    config_digest: str = ""
    started_utc: str = ""
    environment: dict = field(default_factory=dict)

    @classmethod
    def create(cls, command: str, config: Mapping, seed: int | None,
               inputs: Mapping[str, str | Path]) -> "RunManifest":
        from .. import __version__

        digests = {name: file_digest(p) for name, p in inputs.items() if p and Path(p).is_file()}
        return cls(command, dict(config), seed, digests, __version__, config_digest(config),
                   datetime.now(timezone.utc).isoformat(timespec="seconds"),
                   {"python": platform.python_version(), "numpy": np.__version__})

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True, default=str) + "\n")
        return path
