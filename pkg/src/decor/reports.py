"""CSV/JSON report writers with round-trip-exact floats and optional timestamps."""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path


def format_value(value):
    """Floats via repr: shortest string that round-trips the exact 64-bit value."""
    if isinstance(value, float):
        return repr(float(value))
    return value


def write_csv(path, fieldnames, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format_value(v) for k, v in row.items()})


def write_json(path, payload: dict, deterministic: bool = False) -> None:
    payload = dict(payload)
    if not deterministic:
        payload["generated_at"] = datetime.now(timezone.utc).isoformat()
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
