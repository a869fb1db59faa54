"""Machine-readable run reports with provenance.

Reports are JSON documents validated against REPORT_SCHEMA before being
written.  Serialization is deterministic (sorted keys, fixed float repr,
no timestamps), so identical inputs + config + seed give byte-identical
files.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import jsonschema

from . import __version__

SCHEMA_VERSION = "1"

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "tool", "command", "inputs", "seed", "results"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tool": {
            "type": "object",
            "required": ["name", "version"],
            "additionalProperties": False,
            "properties": {
                "name": {"const": "scanres"},
                "version": {"type": "string"},
            },
        },
        "command": {"type": "string"},
        "inputs": {
            "type": "object",
            "additionalProperties": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        },
        "seed": {"type": ["integer", "null"]},
        "config": {"type": "object"},
        "results": {"type": "object"},
    },
}


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _sanitize(obj):
    """JSON has no inf/nan; non-finite values (e.g. the stderr of an
    unidentifiable parameter) become strings."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def build_report(command: str, results: dict, *, inputs: dict | None = None,
                 seed: int | None = None, config: dict | None = None) -> dict:
    """Assemble and validate a report document.

    `inputs` maps a label to a file path; files are hashed here.
    """
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "scanres", "version": __version__},
        "command": command,
        "inputs": {k: sha256_file(v) for k, v in (inputs or {}).items()},
        "seed": seed,
        "results": _sanitize(results),
    }
    if config is not None:
        report["config"] = config
    jsonschema.validate(report, REPORT_SCHEMA)
    return report


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(path, report: dict) -> None:
    Path(path).write_text(dump_report(report))


def flatten_report(report: dict) -> list:
    """(key, value) rows with dotted paths, for the CSV report format."""
    rows = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else str(k), obj[k])
        elif isinstance(obj, (list, tuple)):
            for i, v in enumerate(obj):
                walk(f"{prefix}[{i}]", v)
        else:
            rows.append((prefix, obj))

    walk("", report)
    return rows
