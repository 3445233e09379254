"""Content-addressed run directories and their result files."""

import csv
import json
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import structlog
from cryptography.hazmat.primitives import hashes
from pydantic import BaseModel

logger = structlog.get_logger(__name__)

DISTRIBUTION = "qkd-link-simulator"
TRACKED_PACKAGES = (
    "numpy",
    "scipy",
    "networkx",
    "sympy",
    "pydantic",
    "pydantic-settings",
    "structlog",
    "tenacity",
    "cryptography",
    "prometheus-client",
)
HASH_PREFIX = 16


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(scenario: BaseModel) -> str:
    """SHA-256 of the canonical JSON form of a scenario, output path excluded."""
    payload = scenario.model_dump(mode="json", exclude={"out"})
    digest = hashes.Hash(hashes.SHA256())
    digest.update(canonical_json(payload).encode("utf-8"))
    return digest.finalize().hex()


def package_versions() -> Dict[str, str]:
    versions = {}
    for name in (DISTRIBUTION, *TRACKED_PACKAGES):
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "-".join(str(v) for v in value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def write_csv(path: Path, rows: Sequence[Mapping[str, Any]],
              columns: Optional[Sequence[str]] = None) -> Path:
    """Write rows with RFC 4180 quoting.

    Columns default to the union of the rows' keys in first-seen order;
    missing cells are left empty.
    """
    if columns is None:
        seen: Dict[str, None] = {}
        for row in rows:
            for key in row:
                seen.setdefault(key, None)
        columns = list(seen)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(col)) for col in columns])
    return path


def write_json(path: Path, data: Any) -> Path:
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


class RunDirectory:
    """``<out>/<config-hash[:16]>/`` holding one scenario's artifacts."""

    def __init__(self, root: Path, scenario: BaseModel):
        self.config_hash = config_hash(scenario)
        self.path = Path(root) / self.config_hash[:HASH_PREFIX]
        self.scenario = scenario
        self.written: List[Path] = []

    def prepare(self) -> "RunDirectory":
        self.path.mkdir(parents=True, exist_ok=True)
        return self

    def file(self, name: str) -> Path:
        return self.path / name

    def write_rows(self, name: str, rows: Iterable[Mapping[str, Any]],
                   columns: Optional[Sequence[str]] = None) -> Path:
        path = write_csv(self.file(name), list(rows), columns)
        self.written.append(path)
        return path

    def write_json(self, name: str, data: Any) -> Path:
        path = write_json(self.file(name), data)
        self.written.append(path)
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self.file(name)
        path.write_text(text, encoding="utf-8")
        self.written.append(path)
        return path

    def write_metadata(self, extra: Optional[Dict[str, Any]] = None) -> Path:
        """metadata.json: config hash, seed, kind, scenario and package versions."""
        data: Dict[str, Any] = {
            "config_hash": self.config_hash,
            "kind": getattr(self.scenario, "kind", None),
            "seed": getattr(self.scenario, "seed", None),
            "scenario": self.scenario.model_dump(mode="json", exclude={"out"}),
            "versions": package_versions(),
        }
        if extra:
            data.update(extra)
        return self.write_json("metadata.json", data)

    def finish(self) -> None:
        logger.info("run_written", path=str(self.path),
                    files=[p.name for p in self.written])
