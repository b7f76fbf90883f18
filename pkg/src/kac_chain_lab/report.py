"""Check rows and their CSV / JSON serialization.

Every value is rendered to text before it reaches a writer, exact rationals
as ``p/q`` and floats with ``repr``, so output is byte-identical across runs.
"""

from __future__ import annotations

import csv
import io
import json
import platform
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .rational import fmt_value

EXACT_COLUMNS = ("check", "params", "values", "verdict")
MC_COLUMNS = ("op", "params", "estimate", "stderr", "target", "verdict")


@dataclass(frozen=True)
class Row:
    check: str
    key: tuple
    params: dict
    values: dict = field(default_factory=dict)
    verdict: bool = True
    estimate: float | None = None
    stderr: float | None = None
    target: object = None

    @property
    def is_mc(self) -> bool:
        return self.estimate is not None

    def fields(self) -> dict:
        verdict = "pass" if self.verdict else "fail"
        params = _pairs(self.params)
        if self.is_mc:
            return {"op": self.check, "params": params, "estimate": repr(float(self.estimate)),
                    "stderr": repr(float(self.stderr)), "target": _text(self.target), "verdict": verdict}
        return {"check": self.check, "params": params, "values": _pairs(self.values), "verdict": verdict}


def _text(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    if isinstance(value, (list, tuple)) and value and all(isinstance(v, (list, tuple)) for v in value):
        return "|".join(_text(v) for v in value)
    if isinstance(value, (list, tuple)) and all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        return "(" + ",".join(str(v) for v in value) + ")"
    return fmt_value(value)


def _pairs(d: dict) -> str:
    return " ".join(f"{k}={_text(v)}" for k, v in d.items())


def sort_rows(rows) -> list[Row]:
    return sorted(rows, key=lambda r: (r.check, r.key))


def environment_stamp() -> dict:
    from . import __version__

    return {"package": __version__, "python": platform.python_version(), "numpy": np.__version__}


def to_csv(rows) -> str:
    """One line per row; reports that contain any Monte-Carlo row use the MC columns.

    In the MC layout an exact row puts its values in ``estimate`` and the word
    ``exact`` in ``stderr``.
    """
    rows = sort_rows(rows)
    buf = io.StringIO()
    mc_layout = any(r.is_mc for r in rows)
    columns = MC_COLUMNS if mc_layout else EXACT_COLUMNS
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        f = r.fields()
        if mc_layout and not r.is_mc:
            f = {"op": r.check, "params": f["params"], "estimate": f["values"], "stderr": "exact",
                 "target": "" if r.target is None else _text(r.target), "verdict": f["verdict"]}
        writer.writerow(f)
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, Fraction):
        return fmt_value(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def to_json(rows, seed=None, extra: dict | None = None) -> str:
    rows = sort_rows(rows)
    doc = {
        "environment": environment_stamp(),
        "seed": seed,
        "all_pass": all(r.verdict for r in rows),
        "rows": [r.fields() for r in rows],
    }
    if extra:
        doc.update(_jsonable(extra))
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def all_pass(rows) -> bool:
    return all(r.verdict for r in rows)
