"""Run manifests: config snapshot, input digests, version, timestamps."""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

from . import __version__

MANIFEST_NAME = "manifest.json"


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def build_run_record(
    command: str,
    config: dict,
    inputs: dict[str, str | Path],
    outputs: list[str],
) -> dict:
    return {
        "command": command,
        "toolkit_version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config,
        "input_digests": {
            name: file_digest(path) for name, path in sorted(inputs.items())
        },
        "outputs": sorted(outputs),
    }


def update_manifest(out_dir: str | Path, record: dict) -> Path:
    """Merge one command's run record into <out_dir>/manifest.json."""
    path = Path(out_dir) / MANIFEST_NAME
    manifest: dict = {}
    if path.exists():
        manifest = json.loads(path.read_text(encoding="utf-8"))
    manifest[record["command"]] = record
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def load_manifest(out_dir: str | Path) -> dict:
    path = Path(out_dir) / MANIFEST_NAME
    if not path.exists():
        return {}
    return json.loads(path.read_text(encoding="utf-8"))
