"""CSV/JSON emission with provenance headers.

Every CSV starts with '# key=value' comment lines carrying the config hash,
master seed and artifact version, so any result file can be traced to the
exact run that produced it.  Floats are written with repr (shortest
round-trip form), which keeps re-runs byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(payload: dict) -> str:
    """Short stable hash of the run-relevant config payload."""
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()[:16]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_table(path: str, columns: list, rows: list, meta: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}={meta[key]}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_summary(path: str, summary: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class ScenarioResult:
    """Everything a scenario run produced, before serialization."""

    scenario: str
    tables: dict = field(default_factory=dict)  # name -> (columns, rows)
    gates: dict = field(default_factory=dict)  # name -> bool
    details: dict = field(default_factory=dict)  # JSON-serializable extras
    runtime_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.gates.values())
