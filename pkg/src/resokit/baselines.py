"""Measured-constant baselines for the ratio and operator-norm suites.

The boundedness claims under test all carry implicit constants; they are
measured once at desk scale (``scripts/compute_baselines.py``), frozen into
a versioned JSON file, and every later run asserts stability against the
stored values rather than against sharp constants.
"""

from __future__ import annotations

import json
from pathlib import Path

SCHEMA_VERSION = 1


def load_baselines(path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"baseline schema {data.get('schema')} != {SCHEMA_VERSION}")
    return data["values"]


def save_baselines(path, values: dict) -> None:
    payload = {"schema": SCHEMA_VERSION, "values": values}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def repo_baselines_path() -> Path:
    """The committed baseline file at the repository root."""
    return Path(__file__).resolve().parents[2] / "baselines.json"
