"""
Run Manifest Module
===================

Provenance record written next to every artifact-producing command.
"""

import hashlib
import json
import platform
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from . import __version__


def file_checksum(path: Path) -> str:
    """SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def checksums(paths: Iterable[Path]) -> Dict[str, str]:
    """Checksums keyed by path string; missing files are skipped."""
    return {str(p): file_checksum(p) for p in paths if Path(p).is_file()}


@dataclass
class RunManifest:
    """Everything needed to re-run a command and check its inputs."""
    command: str
    config: Dict[str, Any] = field(default_factory=dict)
    input_checksums: Dict[str, str] = field(default_factory=dict)
    seed: Optional[int] = None
    stop_cause: Optional[str] = None
    warnings: List[str] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)
    engine_version: str = __version__
    python_version: str = field(default_factory=platform.python_version)
    started_at: float = field(default_factory=time.time)
    timings: Dict[str, float] = field(default_factory=dict)

    def time(self, label: str) -> "_Timer":
        """Context manager recording the wall time of a phase under `label`."""
        return _Timer(self, label)

    def write(self, path: Path) -> Path:
        """Write the manifest as JSON."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2, sort_keys=True, default=str)
        return path


class _Timer:
    def __init__(self, manifest: RunManifest, label: str):
        self._manifest = manifest
        self._label = label
        self._start = 0.0

    def __enter__(self):
        self._start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self._manifest.timings[self._label] = round(time.perf_counter() - self._start, 6)
        return False
