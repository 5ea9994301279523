"""Machine-readable reports and plot-data CSVs.

Output is byte-stable for identical inputs: keys are sorted, floats use
``repr`` and non-finite values are written as strings.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

PHASE_ROWS = 5000


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(data) -> str:
    return json.dumps(_clean(data), sort_keys=True, indent=2) + "\n"


def write_json(data, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data))
    return path


def write_table(path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if not isinstance(v, str) else v for v in row])
    return path


def write_scales(path, estimate) -> Path:
    return write_table(path, ["eps", "count"], estimate.table())


def write_coverage(path, covers) -> Path:
    return write_table(path, ["eps", "fraction"], [(c.eps, c.coverage_fraction) for c in covers])


def write_phase_portrait(path, traj, max_rows: int = PHASE_ROWS) -> Path:
    stride = max(1, len(traj) // max_rows)
    header = ["t"] + [f"x{i + 1}" for i in range(traj.dim)]
    rows = np.column_stack([traj.times, traj.states])[::stride]
    return write_table(path, header, rows)


def report(verdict, out_dir, fmt: str = "json", plots: bool = True) -> list[Path]:
    """Write ``report.json`` and, with `plots`, the CSV plot data next to it."""
    if fmt != "json":
        raise ValueError(f"unsupported report format {fmt!r}")
    out = Path(out_dir)
    written = [write_json(verdict.to_dict(), out / "report.json")]
    if not plots:
        return written
    art = verdict.artifacts
    if "box_counting" in art:
        written.append(write_scales(out / "scales.csv", art["box_counting"]))
    if "correlation" in art:
        written.append(write_table(out / "correlation.csv", ["r", "fraction"], art["correlation"].table()))
    if "covers" in art:
        written.append(write_coverage(out / "coverage.csv", art["covers"]))
    for i, traj in enumerate(art.get("trajectories", [])):
        written.append(write_phase_portrait(out / f"phase_portrait_{i}.csv", traj))
    return written
