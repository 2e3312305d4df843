"""CSV / JSON writers with reproducible number formatting."""

from __future__ import annotations

import json
import math
import sys
from contextlib import contextmanager

import numpy as np


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


@contextmanager
def open_output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def write_csv(fh, header, rows):
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(format_value(v) for v in row) + "\n")


def write_json(fh, header, rows, **meta):
    doc = dict(meta)
    doc["rows"] = [{h: _json_value(v) for h, v in zip(header, row)} for row in rows]
    fh.write(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def write_table(path, fmt, header, rows, **meta):
    rows = list(rows)
    with open_output(path) as fh:
        if fmt == "json":
            write_json(fh, header, rows, **meta)
        else:
            write_csv(fh, header, rows)
