"""Canonical report emission.

JSON output has sorted keys, two-space indent and every float written with
17 significant digits, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
SWEEP_COLUMNS = ("control_parameter", "quotient", "target", "rel_gap")


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0.0:
        return "0.0"
    s = format(x, ".17g")
    # keep floats recognisable as floats
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def normalize(obj):
    """Turn dataclasses, enums, tuples and numpy scalars into JSON-shaped data."""
    if is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "as_dict"):
            return normalize(obj.as_dict())
        return normalize(asdict(obj))
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [normalize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _dump(obj, indent, level, out):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, k in enumerate(keys):
            out.append(pad + json.dumps(k) + ": ")
            _dump(obj[k], indent, level + 1, out)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _dump(v, indent, level + 1, out)
            out.append(",\n" if i + 1 < len(obj) else "\n")
        out.append(end + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    else:
        out.append(json.dumps(obj))


def canonical_json(report, indent=2):
    data = normalize(report)
    if isinstance(data, dict) and "schema_version" not in data:
        data["schema_version"] = SCHEMA_VERSION
    out = []
    _dump(data, indent, 0, out)
    return "".join(out) + "\n"


def sweep_csv(sweep):
    """CSV with the fixed header, one row per control value in input order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in sweep.rows:
        c = row.control_parameter
        if isinstance(c, (tuple, list)):
            c = " ".join(format_float(v) for v in c)
        elif isinstance(c, float):
            c = format_float(c)
        w.writerow([c, format_float(row.quotient), format_float(row.target), format_float(row.rel_gap)])
    return buf.getvalue()


def sweep_dict(sweep):
    return {
        "name": sweep.name,
        "meta": sweep.meta,
        "rows": [{"control_parameter": r.control_parameter, "quotient": r.quotient,
                  "target": r.target, "rel_gap": r.rel_gap, "error": r.error,
                  "extras": r.extras} for r in sweep.rows],
    }


def emit_report(report, fmt="json", path=None):
    """Write the report to ``path`` (stdout when None); returns the text."""
    if fmt == "json":
        text = canonical_json(report)
    elif fmt == "csv":
        if not hasattr(report, "rows"):
            raise ValueError("csv output is only defined for sweeps")
        text = sweep_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    return text
