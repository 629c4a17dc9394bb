"""
Run manifest
Records config hash, code version, seeds, timestamps and file checksums of a run
"""
import hashlib
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import config

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
CHUNK = 1 << 16


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(CHUNK), b""):
            digest.update(block)
    return digest.hexdigest()


def config_hash(document: Dict[str, Any]) -> str:
    """sha256 of the canonical JSON form (sorted keys, no whitespace)"""
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """
    Provenance of one run

    Timestamps live only here, so the CSV/JSON artifacts of two runs with the
    same config hash can be compared byte for byte.
    """

    config_hash: str
    command: str
    seed: int
    code_version: str = config.APP_VERSION
    started: str = field(default_factory=_now)
    finished: Optional[str] = None
    status: Optional[str] = None
    exit_code: Optional[int] = None
    artifacts: List[Dict[str, str]] = field(default_factory=list)

    def add(self, path: Path) -> None:
        """
        Record a written file with its checksum

        Args:
            path: File to record
        """
        path = Path(path)
        self.artifacts.append({"file": path.name, "sha256": sha256_file(path)})

    def finish(self, exit_code: int, status: str) -> None:
        self.finished = _now()
        self.exit_code = exit_code
        self.status = status

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config_hash": self.config_hash,
            "command": self.command,
            "code_version": self.code_version,
            "app": config.APP_NAME,
            "seed": self.seed,
            "started": self.started,
            "finished": self.finished,
            "status": self.status,
            "exit_code": self.exit_code,
            "artifacts": sorted(self.artifacts, key=lambda a: a["file"]),
        }

    def write(self, out_dir) -> Path:
        """
        Write manifest.json into the output directory

        Returns:
            Path written
        """
        path = Path(out_dir) / MANIFEST_NAME
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                json.dump(self.to_dict(), f, sort_keys=True, indent=2)
                f.write("\n")
        except OSError as e:
            raise RunManifestError(f"cannot write {path}: {e}") from e
        logger.info("manifest written to %s", path)
        return path


def verify_manifest(out_dir) -> Dict[str, bool]:
    """
    Recompute checksums of the artifacts listed in a manifest

    Returns:
        Mapping file name -> checksum matches
    """
    path = Path(out_dir) / MANIFEST_NAME
    if not path.exists():
        raise RunManifestError(f"no manifest in {out_dir}")
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    out = {}
    for entry in doc.get("artifacts", []):
        target = Path(out_dir) / entry["file"]
        out[entry["file"]] = target.exists() and sha256_file(target) == entry["sha256"]
    return out


class RunManifestError(Exception):
    """Exception raised for errors while writing or checking run manifests."""
    pass
