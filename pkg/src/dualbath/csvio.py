"""Deterministic CSV and metadata output.

Numbers are written with 17 significant digits ('%.17g'), '.' decimal
separator and LF line endings, so a rerun of the same configuration
produces byte-identical files on any platform.  No wall-clock data enters
any output file.
"""

from __future__ import annotations

import json
from pathlib import Path

__all__ = ["write_csv", "write_metadata"]


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".17g")


def write_csv(path, header, rows) -> Path:
    """Write rows of numbers under a comma-separated header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    return path


def write_metadata(path, payload: dict) -> Path:
    """Sidecar JSON with resolved parameters; sorted keys for determinism."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    import numpy as np

    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")
