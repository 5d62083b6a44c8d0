"""Access to the published JSON schemas for the CLI report documents."""

from __future__ import annotations

import json
from importlib import resources

SCHEMA_NAMES = ("fit_report", "selection", "prune_report")


def load_schema(name: str) -> dict:
    """Load one of the published schemas by name (see SCHEMA_NAMES)."""
    if name not in SCHEMA_NAMES:
        raise KeyError(f"unknown schema {name!r}; have {SCHEMA_NAMES}")
    path = resources.files("aldfit") / "schemas" / f"{name}.schema.json"
    return json.loads(path.read_text(encoding="utf-8"))
