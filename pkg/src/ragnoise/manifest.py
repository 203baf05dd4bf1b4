"""Per-stage run manifests: enough to reproduce or audit any pipeline stage."""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path
from typing import Any, Mapping, Sequence

from .dataio import atomic_writer


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(params: Mapping[str, Any]) -> str:
    canonical = json.dumps(params, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_run_manifest(command: str, params: Mapping[str, Any],
                       inputs: Sequence[str | Path], counts: Mapping[str, Any],
                       version: str, seed: int | None = None) -> dict[str, Any]:
    return {
        "command": command,
        "config": dict(params),
        "config_hash": config_hash(params),
        "inputs": {str(p): file_digest(p) for p in inputs},
        "seed": seed,
        "tool_version": version,
        "counts": dict(counts),
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }


def write_run_manifest(path: str | Path, manifest: Mapping[str, Any]) -> None:
    with atomic_writer(path) as fh:
        json.dump(manifest, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
