"""Catalog + waveform ingestion into a marked point pattern.

Inputs: an events CSV (``id,x,y`` plus optional ``time``/``magnitude``), a
waveform CSV (``id`` then equal-length samples), and a JSON sidecar with the
window and the sample times (``time_grid``, or ``t0`` and ``dt``).
"""
from __future__ import annotations

import csv
import json

import numpy as np

from .core import MarkedPointPattern, PatternError, Window


class CatalogError(PatternError):
    pass


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise CatalogError(f"{path}: empty file", [("empty-file", [])])
    return rows[0], rows[1:]


def read_events(path) -> dict:
    header, rows = _read_rows(path)
    cols = [h.strip().lower() for h in header]
    for need in ("id", "x", "y"):
        if need not in cols:
            raise CatalogError(f"events file lacks column {need!r}", [("missing-column", [])])
    idx = {c: n for n, c in enumerate(cols)}
    ids = [r[idx["id"]].strip() for r in rows]
    seen, dups = set(), []
    for i in ids:
        if i in seen:
            dups.append(i)
        seen.add(i)
    if dups:
        raise CatalogError(f"duplicate-event-id: {sorted(set(dups))}",
                           [("duplicate-event-id", sorted(set(dups)))])
    out = {"id": ids,
           "xy": np.array([[float(r[idx["x"]]), float(r[idx["y"]])] for r in rows]).reshape(-1, 2)}
    for extra in ("time", "magnitude"):
        if extra in idx:
            out[extra] = [float(r[idx[extra]]) for r in rows]
    return out


def read_waveforms(path) -> tuple[list, np.ndarray]:
    header, rows = _read_rows(path)
    width = len(header)
    ragged = [r[0] for r in rows if len(r) != width]
    if ragged:
        raise CatalogError(f"ragged-matrix: rows for ids {ragged[:10]}",
                           [("ragged-matrix", ragged)])
    ids = [r[0].strip() for r in rows]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise CatalogError(f"duplicate waveform id {dup}", [("duplicate-event-id", dup)])
    vals = np.array([[float(v) for v in r[1:]] for r in rows]).reshape(len(rows), width - 1)
    return ids, vals


def resample_linear(values: np.ndarray, time_grid: np.ndarray, n: int):
    """Linear interpolation onto ``n`` equispaced times spanning the same interval."""
    new = np.linspace(time_grid[0], time_grid[-1], n)
    out = np.vstack([np.interp(new, time_grid, row) for row in np.atleast_2d(values)])
    return out, new


def ingest_catalog(events_csv, waveforms_csv, sidecar_json,
                   resample: int | None = None) -> MarkedPointPattern:
    events = read_events(events_csv)
    wf_ids, wf = read_waveforms(waveforms_csv)
    with open(sidecar_json, encoding="utf-8") as fh:
        side = json.load(fh)
    window = Window.from_dict(side["window"])
    T = wf.shape[1]
    if "time_grid" in side:
        tg = np.asarray(side["time_grid"], dtype=float)
    else:
        tg = float(side.get("t0", 0.0)) + float(side["dt"]) * np.arange(T)
    if len(tg) != T:
        raise CatalogError("sidecar time grid length differs from waveform length",
                           [("grid-mismatch", [])])
    row_of = {i: n for n, i in enumerate(wf_ids)}
    missing = [i for i in events["id"] if i not in row_of]
    if missing:
        raise CatalogError(f"missing-waveform for event ids {missing}",
                           [("missing-waveform", missing)])
    vals = wf[[row_of[i] for i in events["id"]]]
    if resample:
        vals, tg = resample_linear(vals, tg, int(resample))
    meta = {k: events[k] for k in ("id", "time", "magnitude") if k in events}
    pattern = MarkedPointPattern.from_arrays(window, events["xy"], vals, tg, meta)
    return pattern.check()
