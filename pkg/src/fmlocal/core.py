"""Data model for functional marked point patterns.

A pattern is a set of distinct ground points in a rectangular window, each
carrying a functional mark sampled on a time grid. The analysis path assumes
one grid shared by all marks.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree


class PatternError(ValueError):
    """Raised when a pattern (or a pattern file) violates the data model.

    ``violations`` holds ``(kind, indices)`` tuples, e.g.
    ``("duplicate-point", [3, 7])``.
    """

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = list(violations)


@dataclass(frozen=True)
class Window:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("window bounds must be finite")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate window {vals}")

    @classmethod
    def unit(cls) -> "Window":
        return cls(0.0, 1.0, 0.0, 1.0)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def area(self) -> float:
        return self.width * self.height

    def contains(self, xy) -> np.ndarray:
        """Closed-rectangle membership for an ``(n, 2)`` array of points."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        return ((xy[:, 0] >= self.x_min) & (xy[:, 0] <= self.x_max)
                & (xy[:, 1] >= self.y_min) & (xy[:, 1] <= self.y_max))

    def contains_window(self, other: "Window") -> bool:
        return (other.x_min >= self.x_min and other.x_max <= self.x_max
                and other.y_min >= self.y_min and other.y_max <= self.y_max)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max,
                "y_min": self.y_min, "y_max": self.y_max}

    @classmethod
    def from_dict(cls, d: dict) -> "Window":
        return cls(float(d["x_min"]), float(d["x_max"]),
                   float(d["y_min"]), float(d["y_max"]))


def _frozen(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.flags.writeable:
        a = a.copy()
        a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FunctionalMark:
    """A curve sampled at strictly increasing times."""

    time_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        tg = _frozen(self.time_grid)
        v = _frozen(self.values)
        object.__setattr__(self, "time_grid", tg)
        object.__setattr__(self, "values", v)
        if tg.ndim != 1 or tg.size < 2:
            raise ValueError("time grid needs at least two samples")
        if np.any(np.diff(tg) <= 0):
            raise ValueError("time grid must be strictly increasing")

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class MarkSet:
    """Named deterministic predicate on functional marks.

    The predicate receives the sampled values and the time grid.
    """

    name: str
    predicate: Callable[[np.ndarray, np.ndarray], bool]

    def __call__(self, mark: FunctionalMark) -> bool:
        return bool(self.predicate(mark.values, mark.time_grid))

    def evaluate(self, values: np.ndarray, time_grid: np.ndarray) -> np.ndarray:
        """Membership for every row of a ``(k, T)`` value matrix."""
        return np.array([bool(self.predicate(row, time_grid)) for row in values],
                        dtype=bool)

    @classmethod
    def all_marks(cls) -> "MarkSet":
        return cls("all-marks", lambda v, t: True)

    @classmethod
    def sup_in_interval(cls, a: float, b: float, threshold: float) -> "MarkSet":
        def pred(v, t):
            sel = (t >= a) & (t <= b)
            return bool(sel.any() and v[sel].max() >= threshold)
        return cls(f"sup[{a},{b}]>={threshold}", pred)

    @classmethod
    def mean_at_least(cls, threshold: float) -> "MarkSet":
        return cls(f"mean>={threshold}", lambda v, t: float(np.mean(v)) >= threshold)


@dataclass(frozen=True, eq=False)
class MarkedPointPattern:
    """Ground points with functional marks in a rectangular window.

    Parameters
    ----------
    window : Window
    xy : array_like, shape (k, 2)
    marks : sequence of FunctionalMark, parallel to ``xy``
    metadata : dict, optional
        Pass-through per-point covariates (ids, magnitudes, ...). Not used by
        any statistic.
    """

    window: Window
    xy: np.ndarray
    marks: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "xy", _frozen(np.asarray(self.xy, dtype=float).reshape(-1, 2)))
        object.__setattr__(self, "marks", tuple(self.marks))

    @classmethod
    def from_arrays(cls, window: Window, xy, values, time_grid,
                    metadata: dict | None = None) -> "MarkedPointPattern":
        values = np.asarray(values, dtype=float)
        tg = _frozen(time_grid)
        if values.ndim != 2:
            values = values.reshape(len(np.atleast_2d(xy)), -1)
        marks = tuple(FunctionalMark(tg, row) for row in values)
        return cls(window, xy, marks, dict(metadata or {}))

    def __len__(self) -> int:
        return self.xy.shape[0]

    @cached_property
    def shared_time_grid(self) -> bool:
        if not self.marks:
            return True
        g0 = self.marks[0].time_grid
        return all(m.time_grid is g0 or np.array_equal(m.time_grid, g0)
                   for m in self.marks[1:])

    @cached_property
    def time_grid(self) -> np.ndarray | None:
        if not self.marks:
            return None
        if not self.shared_time_grid:
            raise PatternError("marks do not share a time grid",
                               [("grid-mismatch", [])])
        return self.marks[0].time_grid

    @cached_property
    def values(self) -> np.ndarray:
        """Mark samples stacked as a ``(k, T)`` array (shared grid only)."""
        if not self.marks:
            return np.empty((0, 0))
        self.time_grid  # raises on mixed grids
        out = np.vstack([m.values for m in self.marks])
        out.setflags(write=False)
        return out

    def with_marks(self, marks: Sequence[FunctionalMark]) -> "MarkedPointPattern":
        return MarkedPointPattern(self.window, self.xy, tuple(marks), self.metadata)

    def check(self) -> "MarkedPointPattern":
        """Raise :class:`PatternError` unless the pattern is valid."""
        violations = validate(self)
        if violations:
            kinds = sorted({v[0] for v in violations})
            raise PatternError("invalid pattern: " + ", ".join(kinds), violations)
        return self


def validate(pattern: MarkedPointPattern) -> list:
    """Return a list of ``(kind, indices)`` violations; empty means valid."""
    out = []
    k = len(pattern)
    if len(pattern.marks) != k:
        out.append(("mark-length-mismatch", [k, len(pattern.marks)]))
    bad = [i for i, m in enumerate(pattern.marks)
           if len(m.values) != len(m.time_grid)]
    if bad:
        out.append(("mark-length-mismatch", bad))
    if k:
        xy = pattern.xy
        nonfinite = np.flatnonzero(~np.isfinite(xy).all(axis=1))
        if nonfinite.size:
            out.append(("nonfinite-coordinate", nonfinite.tolist()))
        outside = np.flatnonzero(~pattern.window.contains(xy))
        outside = np.setdiff1d(outside, nonfinite)
        if outside.size:
            out.append(("point-outside-window", outside.tolist()))
        order = np.lexsort((xy[:, 1], xy[:, 0]))
        sx = xy[order]
        same = np.flatnonzero((sx[1:] == sx[:-1]).all(axis=1))
        if same.size:
            dup = np.unique(np.concatenate([order[same], order[same + 1]]))
            out.append(("duplicate-point", dup.tolist()))
    if pattern.marks and not pattern.shared_time_grid:
        out.append(("grid-mismatch", []))
    return out


def restrict(pattern: MarkedPointPattern, sub: Window) -> MarkedPointPattern:
    """Points (with their marks) inside ``sub``; the window becomes ``sub``."""
    if not pattern.window.contains_window(sub):
        raise PatternError("sub-window not contained in pattern window",
                           [("sub-not-contained", [])])
    keep = np.flatnonzero(sub.contains(pattern.xy)) if len(pattern) else np.array([], int)
    meta = {key: [val[i] for i in keep] if isinstance(val, (list, tuple)) else val
            for key, val in pattern.metadata.items()}
    return MarkedPointPattern(sub, pattern.xy[keep],
                              tuple(pattern.marks[i] for i in keep), meta)


class DistanceTable:
    """Symmetric Euclidean distances plus a fixed-radius neighbour query."""

    def __init__(self, xy: np.ndarray):
        self.xy = np.asarray(xy, dtype=float)
        diff = self.xy[:, None, :] - self.xy[None, :, :]
        self.matrix = np.hypot(diff[..., 0], diff[..., 1])
        self._tree = cKDTree(self.xy) if len(self.xy) else None

    def neighbors(self, i: int, r: float) -> np.ndarray:
        """Sorted indices ``j != i`` with ``d(i, j) <= r``."""
        if r <= 0 or self._tree is None:
            return np.empty(0, dtype=np.intp)
        # tree prefilter is widened; the exact test uses the stored matrix
        cand = np.asarray(self._tree.query_ball_point(self.xy[i], r * (1 + 1e-9) + 1e-300),
                          dtype=np.intp)
        cand = cand[(cand != i) & (self.matrix[i, cand] <= r)]
        return np.sort(cand)


def pairwise_distances(pattern: MarkedPointPattern) -> DistanceTable:
    return DistanceTable(pattern.xy)


def close_pairs(xy: np.ndarray, r_max: float):
    """Ordered pairs ``(i, j)``, ``i != j``, with distance ``<= r_max``.

    Returned sorted by ``i`` then ``j`` together with the distances.
    """
    xy = np.asarray(xy, dtype=float)
    if len(xy) < 2 or r_max <= 0:
        e = np.empty(0, dtype=np.intp)
        return e, e.copy(), np.empty(0)
    tree = cKDTree(xy)
    pairs = tree.query_pairs(r_max * (1 + 1e-9), output_type="ndarray")
    if pairs.size == 0:
        e = np.empty(0, dtype=np.intp)
        return e, e.copy(), np.empty(0)
    i = np.concatenate([pairs[:, 0], pairs[:, 1]]).astype(np.intp)
    j = np.concatenate([pairs[:, 1], pairs[:, 0]]).astype(np.intp)
    d = np.hypot(xy[i, 0] - xy[j, 0], xy[i, 1] - xy[j, 1])
    keep = d <= r_max
    i, j, d = i[keep], j[keep], d[keep]
    order = np.lexsort((j, i))
    return i[order], j[order], d[order]


# -- pattern files -----------------------------------------------------------

def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_pattern(pattern: MarkedPointPattern, csv_path) -> None:
    """Write ``x,y,f_0..f_{T-1}`` CSV plus a JSON sidecar (window, time grid)."""
    csv_path = Path(csv_path)
    tg = pattern.time_grid if len(pattern) else np.empty(0)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y"] + [f"f_{k}" for k in range(len(tg))])
        for (x, y), m in zip(pattern.xy, pattern.marks):
            w.writerow([repr(float(x)), repr(float(y))]
                       + [repr(float(v)) for v in m.values])
    side = {"window": pattern.window.to_dict(),
            "time_grid": [float(t) for t in tg]}
    with open(sidecar_path(csv_path), "w", encoding="utf-8") as fh:
        json.dump(side, fh, indent=2)
        fh.write("\n")


def read_pattern(csv_path) -> MarkedPointPattern:
    csv_path = Path(csv_path)
    with open(sidecar_path(csv_path), encoding="utf-8") as fh:
        side = json.load(fh)
    window = Window.from_dict(side["window"])
    tg = np.asarray(side["time_grid"], dtype=float)
    with open(csv_path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise PatternError("empty pattern file", [("missing-header", [])])
    header = rows[0]
    width = len(header)
    if header[:2] != ["x", "y"] or width - 2 != len(tg):
        raise PatternError("header does not match sidecar time grid",
                           [("header-mismatch", [])])
    ragged = [n for n, row in enumerate(rows[1:]) if len(row) != width]
    if ragged:
        raise PatternError(f"ragged rows: {ragged[:10]}", [("ragged-row", ragged)])
    data = np.array(rows[1:], dtype=float).reshape(-1, width)
    pattern = MarkedPointPattern.from_arrays(window, data[:, :2], data[:, 2:], tg)
    return pattern.check()


def default_time_grid(a: float, b: float, n: int = 100) -> np.ndarray:
    return np.linspace(a, b, n)

