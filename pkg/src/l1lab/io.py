"""Readers and writers for the flat-file formats.

* metric: JSON ``{"labels": [...], "dist": [[...]]}``
* point set: CSV whose first line is ``p=<value>``, then one row per point
* graph: JSON ``{"n": ..., "edges": [[u, v, length], ...], "labels": [...]}``
* reports and certificates: JSON objects with snake_case keys
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ShapeError
from .graphs import WeightedGraph
from .metric import FiniteMetricSpace, PointSet


def _text(path_or_buf) -> str:
    if hasattr(path_or_buf, "read"):
        return path_or_buf.read()
    return Path(path_or_buf).read_text()


def dumps(obj) -> str:
    """Deterministic JSON (sorted keys, fixed float repr)."""
    return json.dumps(_plain(obj), indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def _plain(obj):
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def read_metric(path) -> FiniteMetricSpace:
    data = json.loads(_text(path))
    return FiniteMetricSpace(data.get("labels"), np.asarray(data["dist"], dtype=float))


def write_metric(M: FiniteMetricSpace, path) -> None:
    write_json(M.to_dict(), path)


def format_p(p: float) -> str:
    return "inf" if math.isinf(p) else repr(float(p))


def pointset_to_csv(ps: PointSet) -> str:
    buf = io.StringIO()
    buf.write(f"p={format_p(ps.p)}\n")
    w = csv.writer(buf, lineterminator="\n")
    for row in ps.coords:
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def write_pointset(ps: PointSet, path) -> None:
    Path(path).write_text(pointset_to_csv(ps))


def read_pointset(path) -> PointSet:
    lines = _text(path).splitlines()
    if not lines or not lines[0].strip().lower().startswith("p="):
        raise ShapeError("point-set CSV must start with a 'p=<value>' header line")
    p = float(lines[0].strip()[2:])
    rows = [r for r in csv.reader(lines[1:]) if r]
    if not rows:
        raise ShapeError("point-set CSV has no rows")
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ShapeError("ragged point-set CSV")
    return PointSet(p, np.array([[float(x) for x in r] for r in rows]))


def write_graph(G: WeightedGraph, path) -> None:
    write_json(G.to_dict(), path)


def read_graph(path) -> WeightedGraph:
    data = json.loads(_text(path))
    edges = [(int(u), int(v), float(w)) for u, v, w in data["edges"]]
    return WeightedGraph(int(data["n"]), edges, data.get("labels"))


def records_to_csv(records: list[dict]) -> str:
    """Flat CSV of per-trial records; nested values are JSON-encoded."""
    if not records:
        return ""
    keys = sorted({k for r in records for k in r})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in records:
        row = []
        for k in keys:
            v = _plain(r.get(k, ""))
            row.append(json.dumps(v) if isinstance(v, (dict, list)) else
                       repr(v) if isinstance(v, float) else v)
        w.writerow(row)
    return buf.getvalue()
