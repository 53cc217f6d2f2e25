"""Deterministic CSV / JSON emission: CSV is the source of truth (17
significant digits), human tables are rounded views."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .geometry import PointCloud
from .logspace import LogModeVector, NEG_INF
from .simulate import TrajectoryRecord

__all__ = ["fmt17", "RunReport", "write_csv", "trajectory_rows", "cloud_rows",
           "geometry_rows", "load_cloud_csv", "write_json"]


def fmt17(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    xf = float(x)
    if math.isinf(xf):
        return "-inf" if xf < 0 else "inf"
    return f"{xf:.17g}"


def write_csv(path: str, header: list[str], rows) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, (str, int)) else fmt17(v) for v in row])
    return path


def write_json(path: str, payload: dict) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, default=_jsonable)
        fh.write("\n")
    return path


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "__dict__"):
        return {k: v for k, v in vars(obj).items() if not k.startswith("_")}
    return str(obj)


def trajectory_rows(record: TrajectoryRecord):
    """Long-form rows (t, mode_index, sign, logmag) of the sampled states."""
    for k, t in enumerate(record.times):
        point = record.mode_point(k)
        if not point.entries:
            yield (t, 0, 0, NEG_INF)
        for idx in point.indices():
            s, l = point.entries[idx]
            yield (t, idx, s, l)


def cloud_rows(cloud: PointCloud):
    """Long-form rows (point_id, tag, mode_index, sign, logmag)."""
    for pid, (point, tag) in enumerate(zip(cloud.points, cloud.tags)):
        if not point.entries:
            yield (pid, tag, 0, 0, NEG_INF)
        for idx in point.indices():
            s, l = point.entries[idx]
            yield (pid, tag, idx, s, l)


def geometry_rows(scan_rows):
    """(s, eps, log_eps, N_eps, D_eps, local_slope) export rows."""
    for r in scan_rows:
        le = r["log_eps"]
        eps = math.exp(le) if le > -700 else 0.0
        yield (r["s"], eps, le, r["n_eps"], r.get("d_eps"), r.get("local_slope"))


def load_cloud_csv(path: str) -> PointCloud:
    """Inverse of cloud_rows; parse errors carry line numbers."""
    points: dict[int, dict[int, tuple[int, float]]] = {}
    tags: dict[int, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}:1: empty cloud file")
        for lineno, row in enumerate(reader, start=2):
            try:
                pid = int(row[0])
                tag = row[1]
                idx = int(row[2])
                sign = int(row[3])
                logmag = float(row[4])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: bad cloud row {row!r}") from exc
            tags[pid] = tag
            entry = points.setdefault(pid, {})
            if sign != 0:
                entry[idx] = (sign, logmag)
    ordered = sorted(points)
    return PointCloud([LogModeVector(points[i]) for i in ordered],
                      None, 0.0, [tags[i] for i in ordered])


@dataclass
class RunReport:
    """Per-run verdicts and fitted constants plus the emitted file manifest;
    identical configs byte-reproduce every CSV (wall clock lives only
    here)."""

    scenario_hash: str
    command: str
    verdicts: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    wall_clock_s: float = 0.0
    expected: dict = field(default_factory=dict)

    def verdict_matches_expectation(self) -> bool:
        for key, want in self.expected.items():
            if key in self.verdicts and self.verdicts[key] != want:
                return False
        return True

    def to_json(self, path: str) -> str:
        payload = {
            "scenario_hash": self.scenario_hash,
            "command": self.command,
            "verdicts": self.verdicts,
            "constants": self.constants,
            "files": self.files,
            "wall_clock_s": self.wall_clock_s,
            "expected": self.expected,
        }
        return write_json(path, payload)
