"""Certificate records and their JSON/CSV projections."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CSV_COLUMNS = ("alpha", "eta", "y", "value", "bound", "slack", "pass")


def _plain(obj):
    """Recursively convert numpy scalars/arrays and tuples to JSON-ready types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


@dataclass
class CertificateReport:
    """Outcome of checking one bound on an explicit finite grid.

    ``max_ratio`` is max(lhs / rhs) over the grid, where the bound reads
    lhs <= rhs; ``slack_min`` is 1 - max_ratio.  Certified on grid, not proven.
    """

    bound_id: str
    grid_spec: dict
    max_ratio: float
    argmax_point: dict
    constants_used: dict
    tolerance: float = 0.0
    rows: list = field(default_factory=list, repr=False)

    @property
    def slack_min(self) -> float:
        return 1.0 - self.max_ratio

    @property
    def passed(self) -> bool:
        return bool(self.max_ratio <= 1.0 + self.tolerance)

    def to_json(self) -> dict:
        return _plain({
            "bound_id": self.bound_id,
            "grid_spec": self.grid_spec,
            "slack_min": self.slack_min,
            "max_ratio": self.max_ratio,
            "argmax_point": self.argmax_point,
            "constants_used": self.constants_used,
            "tolerance": self.tolerance,
            "pass": self.passed,
        })


def ratio_report(bound_id, lhs, rhs, points: dict, grid_spec, constants, tolerance=0.0,
                 keep_rows=None) -> CertificateReport:
    """Build a report from paired arrays lhs <= rhs evaluated over ``points``."""
    lhs = np.asarray(lhs, dtype=float).ravel()
    rhs = np.asarray(rhs, dtype=float).ravel()
    if np.any(rhs <= 0):
        ratio = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), np.where(lhs > 0, np.inf, 0.0))
    else:
        ratio = lhs / rhs
    i = int(np.argmax(ratio))
    arg = {k: float(np.asarray(v, dtype=float).ravel()[i]) for k, v in points.items()}
    arg["lhs"] = float(lhs[i])
    arg["rhs"] = float(rhs[i])
    rep = CertificateReport(bound_id, grid_spec, float(ratio[i]), arg, constants, tolerance)
    if keep_rows is not None:
        flat = {k: np.asarray(v, dtype=float).ravel() for k, v in points.items()}
        sel = slice(None) if keep_rows is True else keep_rows
        for j in np.arange(len(lhs))[sel]:
            rep.rows.append({**{k: float(v[j]) for k, v in flat.items()},
                             "value": float(lhs[j]), "bound": float(rhs[j]),
                             "slack": float(1.0 - ratio[j]),
                             "pass": bool(ratio[j] <= 1.0 + tolerance)})
    return rep


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(row.get(k, "")) for k in CSV_COLUMNS})
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v
