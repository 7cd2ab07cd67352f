"""CSV/JSON emission shared by the experiments and the command line."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .robustness import is_unbounded

SIG_DIGITS = 12


def fmt(x) -> str:
    """Serialize one CSV cell; floats get 12 significant digits."""
    if x is None:
        return ""
    if is_unbounded(x):
        return "unbounded"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            # an infinite float must never reach the output
            raise ValueError("infinite value in output; use the unbounded sentinel")
        if x == 0:
            return "0"
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def round_json(obj):
    """Recursively round floats to 12 significant digits for JSON output."""
    if is_unbounded(obj):
        return "unbounded"
    if isinstance(obj, dict):
        return {k: round_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_json(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return round_json(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            raise ValueError("infinite value in output; use the unbounded sentinel")
        return float(f"{x:.{SIG_DIGITS}g}")
    return obj


def dumps(obj) -> str:
    return json.dumps(round_json(obj), indent=2) + "\n"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def provenance_line(seed=None, inputs=None) -> str:
    parts = [f"picput {__version__}", f"seed={seed if seed is not None else 'none'}"]
    for name, path in (inputs or {}).items():
        parts.append(f"{name}=sha256:{sha256_file(path)}")
    return "# " + " ".join(parts)


def render_csv(columns, rows, comments=()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(c if c.startswith("#") else "# " + c)
        buf.write("\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def read_csv_rows(path) -> tuple[list[str], list[dict]]:
    """Parse a CSV written by :func:`render_csv`, skipping comment lines."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        rows = list(reader)
        return list(reader.fieldnames or []), rows
