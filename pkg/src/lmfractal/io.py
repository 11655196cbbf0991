"""Deterministic CSV and JSON writers.

CSV files are RFC-4180 style with CRLF line ends and reals printed with 17
significant digits. JSON reports put the only non-deterministic field,
``generated_at``, alone on the second line so that two runs can be compared
byte for byte after dropping that line.
"""
from __future__ import annotations

import csv
import datetime as _dt
import json
import math
from pathlib import Path

import numpy as np

from .analysis import _jsonable

TIMESTAMP_KEY = "generated_at"


def fmt(x) -> str:
    """Round-trip-safe text for one CSV cell."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.17g}"
    return str(x)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def dumps_report(payload: dict, timestamp: str | None = None) -> str:
    """Sorted, indented JSON with ``generated_at`` isolated on line 2."""
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    body = dict(_jsonable(payload))
    body.pop(TIMESTAMP_KEY, None)
    text = json.dumps(body, indent=2, sort_keys=True, allow_nan=True)
    stamp = f"  {json.dumps(TIMESTAMP_KEY)}: {json.dumps(timestamp)}"
    if text == "{}":
        return "{\n" + stamp + "\n}\n"
    return "{\n" + stamp + ",\n" + text[2:] + "\n"


def write_json(path, payload: dict, timestamp: str | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(payload, timestamp))
    return path


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def strip_timestamp(text: str) -> str:
    """Drop the ``generated_at`` header line for byte comparisons."""
    return "".join(line for line in text.splitlines(keepends=True)
                   if not line.lstrip().startswith(json.dumps(TIMESTAMP_KEY)))
