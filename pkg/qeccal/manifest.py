# MIT License
#
# Copyright (c) 2026 Jonas Waldeck
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND.

# qeccal:manifest.py

from __future__ import annotations

import hashlib
import json
import platform
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Iterable, Optional

MANIFEST_NAME = "manifest.json"
_PACKAGES = ("qeccal", "numpy", "scipy", "networkx")


def _utc_now_iso() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


def sha256_file(path: Path, chunk: int = 1 << 20) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as f:
        while True:
            block = f.read(chunk)
            if not block:
                break
            h.update(block)
    return h.hexdigest()


def stable_hash(obj: Any) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def package_versions() -> dict[str, str]:
    out = {"python": platform.python_version()}
    for name in _PACKAGES:
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            out[name] = "unknown"
    return out


def _hashes(paths: Iterable[Path], root: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    for p in paths:
        p = Path(p)
        if not p.is_file():
            continue
        try:
            key = str(p.resolve().relative_to(root.resolve()))
        except ValueError:
            key = str(p)
        out[key] = sha256_file(p)
    return dict(sorted(out.items()))


def write_manifest(
    out_dir: Path,
    command: str,
    argv: list[str],
    *,
    seed: Optional[int],
    config: dict[str, Any],
    inputs: Iterable[Path] = (),
    outputs: Iterable[Path] = (),
    exit_code: int = 0,
    error: Optional[str] = None,
) -> Path:
    """Provenance of one run; failed runs record their exit code and error too."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "argv": list(argv),
        "created_utc": _utc_now_iso(),
        "seed": seed,
        "config": config,
        "versions": package_versions(),
        "inputs": _hashes(inputs, out_dir),
        "outputs": _hashes(outputs, out_dir),
        "status": "ok" if exit_code == 0 else "failed",
        "exit_code": exit_code,
        "error": error,
    }
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return path
