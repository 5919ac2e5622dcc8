"""Test functions on pairs (and triples) of sampled functional marks.

All integrals over the time domain use the trapezoidal rule on the stored
grid. Marks on different grids are an error, never silently resampled.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GridMismatch(ValueError):
    pass


KINDS = ("lp", "supremum", "variogram", "lp_derivative", "constant_one")


def trapezoid_weights(time_grid) -> np.ndarray:
    """Quadrature weights ``w`` with ``sum(w * f) == trapz(f, t)``."""
    t = np.asarray(time_grid, dtype=float)
    dt = np.diff(t)
    w = np.zeros_like(t)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


def _grid(f1, f2, *more):
    g = np.asarray(f1.time_grid)
    for f in (f2, *more):
        if not np.array_equal(g, f.time_grid):
            raise GridMismatch("marks are sampled on different time grids")
    return g


def _lp(diff: np.ndarray, t: np.ndarray, p: float) -> float:
    if np.isinf(p):
        return float(np.max(np.abs(diff)))
    return float(np.trapezoid(np.abs(diff) ** p, t) ** (1.0 / p))


def lp_distance(f1, f2, p: float = 2.0) -> float:
    if not p >= 1:
        raise ValueError("p must be >= 1")
    t = _grid(f1, f2)
    return _lp(f1.values - f2.values, t, p)


def variogram_testfun(f1, f2, mean_curve) -> float:
    t = _grid(f1, f2, mean_curve)
    return float(np.trapezoid((f1.values - mean_curve.values)
                              * (f2.values - mean_curve.values), t))


def derivative(values: np.ndarray, time_grid: np.ndarray) -> np.ndarray:
    """First derivative: central differences inside, one-sided at the ends."""
    return np.gradient(values, time_grid, axis=-1, edge_order=1)


def lp_derivative_distance(f1, f2, p: float = 2.0, s: int = 1) -> float:
    if s != 1:
        raise ValueError(f"unsupported-order: s={s}")
    t = _grid(f1, f2)
    return _lp(derivative(f1.values, t) - derivative(f2.values, t), t, p)


@dataclass(frozen=True)
class MeanCurve:
    time_grid: np.ndarray
    values: np.ndarray

    @classmethod
    def of(cls, values: np.ndarray, time_grid) -> "MeanCurve":
        return cls(np.asarray(time_grid, float), np.asarray(values, float).mean(axis=0))


@dataclass(frozen=True)
class TestFunction:
    """Pairwise test function of a given kind.

    ``p`` applies to ``lp`` and ``lp_derivative``. For triples the value is the
    sum of the three pairwise values, except ``constant_one`` which is 1.
    """

    kind: str = "lp"
    p: float = 2.0

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown test function kind {self.kind!r}")
        if self.kind in ("lp", "lp_derivative") and not self.p >= 1:
            raise ValueError("p must be >= 1")

    @property
    def mark_free(self) -> bool:
        return self.kind == "constant_one"

    @property
    def depends_on_sample(self) -> bool:
        """True when the value depends on the whole mark sample (mean curve)."""
        return self.kind == "variogram"

    def label(self) -> str:
        if self.kind in ("lp", "lp_derivative"):
            return f"{self.kind}(p={self.p:g})"
        return self.kind

    def pair(self, f1, f2, mean_curve: MeanCurve | None = None) -> float:
        """Direct evaluation on two :class:`FunctionalMark` objects."""
        if self.kind == "lp":
            return lp_distance(f1, f2, self.p)
        if self.kind == "supremum":
            return lp_distance(f1, f2, np.inf)
        if self.kind == "lp_derivative":
            return lp_derivative_distance(f1, f2, self.p)
        if self.kind == "variogram":
            if mean_curve is None:
                raise ValueError("variogram test function needs the mean curve")
            return variogram_testfun(f1, f2, mean_curve)
        _grid(f1, f2)
        return 1.0

    def triple(self, f0, f1, f2, mean_curve: MeanCurve | None = None) -> float:
        if self.kind == "constant_one":
            return 1.0
        return (self.pair(f0, f1, mean_curve) + self.pair(f0, f2, mean_curve)
                + self.pair(f1, f2, mean_curve))

    def matrix(self, values: np.ndarray, time_grid, sample_index=None) -> np.ndarray:
        """All pairwise values between the rows of ``values``.

        ``sample_index`` selects which rows form the current mark sample; it
        only matters for the variogram kind, whose mean curve is taken over
        ``values[sample_index]``.
        """
        values = np.asarray(values, dtype=float)
        t = np.asarray(time_grid, dtype=float)
        k = len(values)
        if self.kind == "constant_one":
            return np.ones((k, k))
        w = trapezoid_weights(t)
        if self.kind == "variogram":
            sample = values if sample_index is None else values[sample_index]
            c = values - sample.mean(axis=0)
            g = (c * w) @ c.T
            return (g + g.T) / 2
        if self.kind == "lp_derivative":
            values = derivative(values, t)
        p = np.inf if self.kind == "supremum" else self.p
        out = np.zeros((k, k))
        for a in range(k - 1):
            diff = np.abs(values[a + 1:] - values[a])
            if np.isinf(p):
                row = diff.max(axis=1)
            elif p == 1:
                row = diff @ w
            elif p == 2:
                row = np.sqrt((diff * diff) @ w)
            else:
                row = ((diff ** p) @ w) ** (1.0 / p)
            out[a, a + 1:] = row
            out[a + 1:, a] = row
        return out


def parse_testfun(name: str, p: float = 2.0) -> TestFunction:
    """Map CLI names (``lp``, ``sup``, ``variogram``, ``dlp``, ``one``) to kinds."""
    aliases = {"lp": "lp", "sup": "supremum", "supremum": "supremum",
               "variogram": "variogram", "dlp": "lp_derivative",
               "lp_derivative": "lp_derivative", "one": "constant_one",
               "constant_one": "constant_one"}
    try:
        return TestFunction(aliases[name], float(p))
    except KeyError:
        raise ValueError(f"unknown test function {name!r}") from None
