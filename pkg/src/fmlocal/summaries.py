"""Local and global t-weighted marked inhomogeneous K-functions.

For a point ``i`` with mark ``m_i`` the second-order local curve is

    K_i(r) = 1 / (nu(E) nu(E1)) * sum_{j != i, |x_j - x_i| <= r, m_j in E1}
             w(x_i, x_j) t(m_i, m_j) / (rho(x_i) rho(x_j))

and the third-order curve sums over ordered distinct neighbour pairs
``(j, l)`` with the product of the pairwise edge weights. ``nu`` is the
empirical mark-set fraction (1 without mark sets). The global curve is the
sum of all local curves divided by ``|W|``.

Geometry (neighbour lists, distance bins, edge weights, intensities) is
computed once per engine; evaluating another mark assignment only gathers
test-function values, so mark resampling reuses it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import MarkedPointPattern, MarkSet, Window, close_pairs
from .intensity import IntensityEstimate, constant_intensity
from .testfun import TestFunction

ISO_CAP = 10.0
EDGE_KINDS = ("none", "isotropic", "translation")
_EDGE_ALIASES = {"iso": "isotropic", "isotropic": "isotropic", "trans": "translation",
                 "translation": "translation", "none": "none"}


class EstimatorError(ValueError):
    pass


def edge_kind(name: str) -> str:
    try:
        return _EDGE_ALIASES[name]
    except KeyError:
        raise EstimatorError(f"unknown edge correction {name!r}") from None


def default_r_max(window: Window) -> float:
    return min(window.width, window.height) / 4.0


def default_r_grid(window: Window, n: int = 50, r_max: float | None = None) -> np.ndarray:
    if r_max is None:
        r_max = default_r_max(window)
    if not r_max > 0:
        raise EstimatorError("r_max must be positive")
    return np.linspace(0.0, r_max, n)


@dataclass
class SummaryCurve:
    r: np.ndarray
    values: np.ndarray
    label: str = "global"
    flags: dict = field(default_factory=dict)


def _arc_outside(dist: np.ndarray, d: np.ndarray) -> np.ndarray:
    # half-angle of the arc beyond one side; 0 if the circle does not reach it
    ratio = np.clip(dist / d, 0.0, 1.0)
    return np.arccos(ratio)


def isotropic_fraction(xy, d, window: Window) -> np.ndarray:
    """Fraction of the circle of radius ``d`` about ``xy`` lying inside ``window``.

    Inclusion-exclusion over the four sides: each side cuts off an arc of
    half-angle ``acos(dist/d)``; adjacent cut-off arcs overlap exactly when the
    corner lies inside the circle.
    """
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    d = np.broadcast_to(np.asarray(d, dtype=float), (len(xy),))
    left = xy[:, 0] - window.x_min
    right = window.x_max - xy[:, 0]
    down = xy[:, 1] - window.y_min
    up = window.y_max - xy[:, 1]
    aL, aR, aD, aU = (_arc_outside(s, d) for s in (left, right, down, up))
    outside = 2.0 * (aL + aR + aD + aU)
    half_pi = np.pi / 2
    for a1, a2 in ((aL, aD), (aL, aU), (aR, aD), (aR, aU)):
        outside -= np.maximum(0.0, a1 + a2 - half_pi)
    return 1.0 - outside / (2.0 * np.pi)


def isotropic_weights(xy, d, window: Window, cap: float = ISO_CAP):
    """Ripley isotropic weights and a boolean array marking capped entries."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise EstimatorError("zero-distance: isotropic weight needs d > 0")
    frac = isotropic_fraction(xy, d, window)
    with np.errstate(divide="ignore"):
        w = np.where(frac > 0, 1.0 / np.maximum(frac, 1e-300), np.inf)
    capped = w > cap
    return np.minimum(w, cap), capped


def isotropic_weight(x, d: float, window: Window, cap: float = ISO_CAP) -> float:
    if not d > 0:
        raise EstimatorError("zero-distance: isotropic weight needs d > 0")
    w, _ = isotropic_weights(np.asarray(x, float)[None, :], np.array([d]), window, cap)
    return float(w[0])


def translation_weights(xy1, xy2, window: Window) -> np.ndarray:
    xy1 = np.atleast_2d(np.asarray(xy1, dtype=float))
    xy2 = np.atleast_2d(np.asarray(xy2, dtype=float))
    dx = np.abs(xy2[:, 0] - xy1[:, 0])
    dy = np.abs(xy2[:, 1] - xy1[:, 1])
    ox = window.width - dx
    oy = window.height - dy
    if np.any(ox <= 0) or np.any(oy <= 0):
        raise EstimatorError("out-of-range: separation exceeds window side")
    return window.area() / (ox * oy)


def translation_weight(x1, x2, window: Window) -> float:
    return float(translation_weights(x1, x2, window)[0])


class LocalKEngine:
    """Precomputed geometry for local K curves of one ground pattern.

    Parameters
    ----------
    pattern : MarkedPointPattern
    testfun : TestFunction
    intensity : IntensityEstimate, optional
        Evaluated at the pattern's points. Defaults to the constant estimator.
        For a restricted pattern pass the estimate of the full pattern.
    r_grid : array, optional
    edge : {"none", "isotropic", "translation"}
    n : {2, 3}
    mark_sets : tuple of MarkSet, optional
        ``(E, E1)`` for n = 2, ``(E, E1)`` or ``(E, E1, E2)`` for n = 3.
    backend : {"cython", "python"}, optional
    """

    def __init__(self, pattern: MarkedPointPattern, testfun: TestFunction,
                 intensity: IntensityEstimate | None = None, r_grid=None,
                 edge: str = "isotropic", n: int = 2, mark_sets=None,
                 backend: str | None = None):
        if n not in (2, 3):
            raise EstimatorError(f"unsupported order n={n}")
        self.pattern = pattern
        self.testfun = testfun
        self.n = n
        self.edge = edge_kind(edge)
        self.window = pattern.window
        self.k = len(pattern)
        self._kern = kernels.get_backend(backend)
        self.r = (default_r_grid(self.window) if r_grid is None
                  else np.asarray(r_grid, dtype=float))
        if self.r.ndim != 1 or self.r.size < 1 or np.any(np.diff(self.r) <= 0):
            raise EstimatorError("r grid must be strictly increasing")
        if self.r[-1] <= 0:
            raise EstimatorError("r_max must be positive")
        if intensity is None and self.k:
            intensity = constant_intensity(pattern)
        self.intensity = intensity

        xy = pattern.xy
        rho = intensity(xy) if self.k else np.empty(0)
        if np.any(~(rho > 0)):
            raise EstimatorError("nonpositive-intensity at a data point")
        self.rho = rho
        self.irho = 1.0 / rho

        i, j, d = close_pairs(xy, float(self.r[-1]))
        self.bins = np.searchsorted(self.r, d, side="left").astype(np.int64)
        self.cap_hits = 0
        if self.edge == "isotropic":
            w, capped = isotropic_weights(xy[i], d, self.window)
            self.cap_hits = int(capped.sum())
        elif self.edge == "translation":
            w = translation_weights(xy[i], xy[j], self.window)
        else:
            w = np.ones(len(d))
        self.pair_i = i.astype(np.int64)
        self.nbr = j.astype(np.int64)
        self.dist = d
        self.a = w / rho[j]
        self.row_ptr = np.zeros(self.k + 1, dtype=np.int64)
        np.cumsum(np.bincount(i, minlength=self.k), out=self.row_ptr[1:])

        self.mark_sets = None
        if mark_sets is not None:
            sets = tuple(mark_sets)
            if len(sets) == 2 and n == 3:
                sets = sets + (sets[1],)
            if len(sets) != n:
                raise EstimatorError(f"need {n} mark sets for order {n}")
            self.mark_sets = sets
            vals, tg = pattern.values, pattern.time_grid
            self._member = [s.evaluate(vals, tg) for s in sets]
        self._tmat_fixed = None

    @property
    def cap_binds(self) -> bool:
        return self.cap_hits > 0

    def test_matrix(self, sigma: np.ndarray) -> np.ndarray:
        if self.testfun.depends_on_sample:
            return self.testfun.matrix(self.pattern.values, self.pattern.time_grid, sigma)
        if self._tmat_fixed is None:
            if self.testfun.mark_free:
                self._tmat_fixed = np.ones((self.k, self.k))
            else:
                self._tmat_fixed = np.ascontiguousarray(self.testfun.matrix(
                    self.pattern.values, self.pattern.time_grid))
        return self._tmat_fixed

    def curves(self, sigma=None, rows=None) -> np.ndarray:
        """Local curves, one row per entry of ``rows`` (default: all points).

        ``sigma[j]`` is the index of the original mark carried by point ``j``
        (identity when omitted); this is how resampled patterns are evaluated.
        """
        k = self.k
        sigma = (np.arange(k, dtype=np.int64) if sigma is None
                 else np.ascontiguousarray(sigma, dtype=np.int64))
        rows = (np.arange(k, dtype=np.int64) if rows is None
                else np.ascontiguousarray(np.atleast_1d(rows), dtype=np.int64))
        if rows.size and (rows.min() < 0 or rows.max() >= k):
            raise EstimatorError("index-out-of-range")
        nb = len(self.r)
        if k == 0 or rows.size == 0:
            return np.zeros((rows.size, nb))
        tmat = self.test_matrix(sigma)
        if self.mark_sets is None:
            m1 = np.ones(k)
            m2 = m1
        else:
            m1 = self._member[1][sigma].astype(float)
            m2 = self._member[2][sigma].astype(float) if self.n == 3 else m1
        args = (rows, self.row_ptr, self.nbr, self.bins, self.a, self.irho,
                sigma, tmat, m1)
        if self.n == 2:
            out = self._kern.accumulate_n2(*args, nb)
        else:
            out = self._kern.accumulate_n3(*args, m2, not self.testfun.mark_free, nb)
        out = np.asarray(out)
        if self.mark_sets is not None:
            own = self._member[0][sigma]
            nus = [float(np.mean(mem[sigma])) for mem in self._member]
            if min(nus) > 0:
                out = out * (1.0 / np.prod(nus))
            else:
                out = np.zeros_like(out)
            out[~own[rows]] = 0.0
        return out

    def own_mark_in_set(self, sigma=None) -> np.ndarray:
        if self.mark_sets is None:
            return np.ones(self.k, dtype=bool)
        sigma = np.arange(self.k) if sigma is None else np.asarray(sigma)
        return self._member[0][sigma]

    def global_from_locals(self, local: np.ndarray) -> np.ndarray:
        """Sum rows in index order, then divide by ``|W|``."""
        acc = np.zeros(local.shape[1])
        for row in local:
            acc = acc + row
        return acc / self.window.area()

    def global_curve(self, sigma=None) -> np.ndarray:
        return self.global_from_locals(self.curves(sigma))


def local_k(pattern: MarkedPointPattern, i: int, testfun: TestFunction,
            intensity: IntensityEstimate | None = None, r_grid=None,
            edge: str = "isotropic", mark_sets=None, n: int = 2,
            backend: str | None = None) -> SummaryCurve:
    """Local t-weighted marked n-th order inhomogeneous K-function of point ``i``."""
    if not 0 <= i < len(pattern):
        raise EstimatorError("index-out-of-range")
    eng = LocalKEngine(pattern, testfun, intensity, r_grid, edge, n, mark_sets, backend)
    vals = eng.curves(rows=[i])[0]
    flags = {"cap_binds": eng.cap_binds}
    if mark_sets is not None and not eng.own_mark_in_set()[i]:
        flags["mark_not_in_E"] = True
    return SummaryCurve(eng.r, vals, f"local({i})", flags)


def global_k(pattern: MarkedPointPattern, testfun: TestFunction,
             intensity: IntensityEstimate | None = None, r_grid=None,
             edge: str = "isotropic", mark_sets=None, n: int = 2,
             backend: str | None = None) -> SummaryCurve:
    """Global estimator: ``(1/|W|) * sum_i local_k(i)``."""
    eng = LocalKEngine(pattern, testfun, intensity, r_grid, edge, n, mark_sets, backend)
    vals = eng.global_curve()
    return SummaryCurve(eng.r, vals, "global", {"cap_binds": eng.cap_binds})


def all_local_k(pattern: MarkedPointPattern, testfun: TestFunction,
                intensity: IntensityEstimate | None = None, r_grid=None,
                edge: str = "isotropic", mark_sets=None, n: int = 2,
                backend: str | None = None):
    """All local curves as ``(r, values[k, len(r)])``."""
    eng = LocalKEngine(pattern, testfun, intensity, r_grid, edge, n, mark_sets, backend)
    return eng.r, eng.curves()


__all__ = ["SummaryCurve", "LocalKEngine", "local_k", "global_k", "all_local_k",
           "isotropic_weight", "isotropic_weights", "isotropic_fraction",
           "translation_weight", "translation_weights", "default_r_grid",
           "default_r_max", "MarkSet", "EstimatorError"]
