"""Binary payload + JSON header file I/O shared by embeddings, projectors, and LoRA weights.

Payloads are raw little-endian IEEE-754 32-bit floats in row-major order.
Each payload has a JSON sidecar header; by default the header lives at
`<payload>.json`.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def header_path_for(path) -> Path:
    return Path(str(path) + ".json")


def write_payload(path, matrix: np.ndarray) -> None:
    data = np.ascontiguousarray(matrix, dtype="<f4")
    Path(path).write_bytes(data.tobytes())


def read_payload(path, rows: int, cols: int) -> np.ndarray:
    raw = Path(path).read_bytes()
    expected = rows * cols * 4
    if len(raw) != expected:
        raise ValueError(
            f"{path}: payload is {len(raw)} bytes, header implies {expected} "
            f"({rows}x{cols} 32-bit floats)"
        )
    flat = np.frombuffer(raw, dtype="<f4")
    return flat.astype(np.float64).reshape(rows, cols)


def write_header(path, fields: dict) -> None:
    Path(path).write_text(json.dumps(fields, sort_keys=True, indent=2) + "\n")


def read_header(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"missing header file {p}")
    try:
        header = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{p}: header is not valid JSON: {exc}") from exc
    if not isinstance(header, dict):
        raise ValueError(f"{p}: header must be a JSON object")
    return header


def require_int(header: dict, key: str, path) -> int:
    value = header.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"{path}: header field {key!r} must be an integer, got {value!r}")
    return value
