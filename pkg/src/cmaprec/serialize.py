"""JSON helpers shared by the CLI, HTTP service, and file formats."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

SIGNIFICANT_DIGITS = 9


def round_floats(obj, digits: int = SIGNIFICANT_DIGITS):
    """Recursively round floats to a fixed number of significant digits.

    Keeps serialized artifacts short and makes JSON round trips stable:
    parsing the output reproduces the rounded value exactly.
    """
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, (np.floating,)):
        return float(f"{float(obj):.{digits}g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist(), digits)
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj


def dump_json(obj, path, indent: int = 2) -> None:
    Path(path).write_text(json.dumps(round_floats(obj), indent=indent) + "\n")


def load_json(path):
    return json.loads(Path(path).read_text())
