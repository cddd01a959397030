"""Result envelopes and their JSON / CSV serialization.

Floats are written with 17 significant digits so that values round-trip
exactly; non-finite floats become ``null`` in JSON and empty cells in CSV.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np


@dataclass
class ResultEnvelope:
    command: str
    config: dict
    seed: int | None
    columns: list
    rows: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    wall_clock_s: float | None = None

    def as_dict(self) -> dict:
        out = {"command": self.command, "config": self.config, "seed": self.seed,
               "columns": list(self.columns), "rows": self.rows, "diagnostics": self.diagnostics}
        if self.wall_clock_s is not None:
            out["wall_clock_s"] = self.wall_clock_s
        return out


def _number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def to_json(obj, indent: int = 0, step: int = 2) -> str:
    """Deterministic JSON text for nested dicts / lists of scalars."""
    pad = " " * (indent + step)
    end = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent + step, step)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(to_json(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + step, step) for v in seq) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    return _number(obj)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (dict, list, tuple, np.ndarray)):
        return to_json(v).replace("\n", " ")
    s = _number(v)
    return "" if s == "null" else s


def to_csv(env: ResultEnvelope) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(env.columns)
    for row in env.rows:
        w.writerow([_cell(row.get(c)) for c in env.columns])
    return buf.getvalue()


def render(env: ResultEnvelope, fmt: str = "json") -> str:
    if fmt == "json":
        return to_json(env.as_dict()) + "\n"
    if fmt == "csv":
        return to_csv(env)
    raise ValueError(f"unknown format {fmt!r}")


def write_envelope(env: ResultEnvelope, fmt: str = "json", path: str | None = None) -> None:
    """Write to ``path`` or to stdout when ``path`` is None or ``-``."""
    text = render(env, fmt)
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
