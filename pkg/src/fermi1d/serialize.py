"""JSON and CSV emission for results and grid data."""

from __future__ import annotations

import csv
import json
import sys

import numpy as np

__all__ = ["to_jsonable", "save_json", "write_csv"]


def to_jsonable(obj):
    """Recursively convert results, arrays and numpy scalars to JSON types."""
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def save_json(obj, path: str | None = None) -> str:
    """Serialize to ``path`` or stdout; returns the rendered text."""
    text = json.dumps(to_jsonable(obj), indent=2)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def write_csv(path: str, header: list[str], rows) -> None:
    """CSV with a header row; floats are written with 1e-12 precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{x:.12e}" if isinstance(x, (float, np.floating))
                             else x for x in row])
