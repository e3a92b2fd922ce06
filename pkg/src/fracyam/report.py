"""Verification records and their JSON / CSV / text serialisations."""

import csv
import io
import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


FIELDS = ("check_id", "params", "computed", "reference", "tolerance", "status", "runtime_ms")


def _plain(v):
    # numpy scalars and arrays become JSON-native values
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, Enum):
        return v.value
    return v


@dataclass
class VerificationReport:
    check_id: str
    params: dict = field(default_factory=dict)
    computed: object = None
    reference: object = "none"
    tolerance: float = 0.0
    status: Status = Status.INCONCLUSIVE
    runtime_ms: int = 0
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.status = Status(self.status)
        if self.status is Status.PASS and self.reference != "none" and self.tolerance:
            try:
                c = np.asarray(self.computed, dtype=float)
                r = np.asarray(self.reference, dtype=float)
            except (TypeError, ValueError):
                return  # categorical outcomes carry no numeric tolerance
            if c.shape == r.shape and not np.all(np.abs(c - r) <= self.tolerance * np.maximum(1.0, np.abs(r))):
                raise ValueError(f"{self.check_id}: pass status inconsistent with tolerance")

    @property
    def passed(self):
        return self.status is Status.PASS

    def as_dict(self):
        return {f: _plain(getattr(self, f)) for f in FIELDS}

    def as_record(self):
        """Compact record {check, params, value, reference, tol, status}."""
        d = self.as_dict()
        return {"check": d["check_id"], "params": d["params"], "value": d["computed"],
                "reference": d["reference"], "tol": d["tolerance"], "status": d["status"]}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in FIELDS})


def judge(ok, inconclusive=False):
    if inconclusive:
        return Status.INCONCLUSIVE
    return Status.PASS if ok else Status.FAIL


@contextmanager
def timed():
    """Yields a one-element list that receives the elapsed milliseconds."""
    box = [0]
    t0 = time.perf_counter()
    try:
        yield box
    finally:
        box[0] = int(round(1000.0 * (time.perf_counter() - t0)))


def to_json(reports, include_runtime=True):
    rows = [r.as_dict() for r in reports]
    if not include_runtime:
        for row in rows:
            row.pop("runtime_ms")
    return json.dumps(rows, indent=2, sort_keys=False) + "\n"


def to_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in reports:
        d = r.as_dict()
        w.writerow([json.dumps(d[f]) if isinstance(d[f], (dict, list)) else d[f] for f in FIELDS])
    return buf.getvalue()


def to_text(reports):
    if not reports:
        return "(no checks)\n"
    rows = []
    for r in reports:
        d = r.as_dict()
        rows.append([d["check_id"], d["status"], _short(d["computed"]), _short(d["reference"]),
                     f"{d['tolerance']:.1e}", str(d["runtime_ms"])])
    head = ["check_id", "status", "computed", "reference", "tol", "ms"]
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(head)]
    line = lambda cells: "  ".join(c.ljust(wd) for c, wd in zip(cells, widths)).rstrip()
    return "\n".join([line(head), line(["-" * wd for wd in widths])] + [line(r) for r in rows]) + "\n"


def _short(v):
    if isinstance(v, float):
        return f"{v:.8g}"
    if isinstance(v, list):
        s = "[" + ", ".join(_short(x) for x in v[:4]) + (", ..." if len(v) > 4 else "") + "]"
        return s
    return str(v)


def emit(reports, fmt="json", path=None):
    """Write reports to `path` (or return the text when path is None or '-')."""
    text = {"json": to_json, "csv": to_csv, "text": to_text}[fmt](list(reports))
    if path is None or path == "-":
        return text
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text
