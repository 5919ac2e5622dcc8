"""Brute-force reference implementations used as test oracles."""
import math

import numpy as np

from fmlocal.summaries import isotropic_weight
from fmlocal.testfun import MeanCurve


def edge_weight(x, y, window, edge):
    if edge == "none":
        return 1.0
    d = math.hypot(y[0] - x[0], y[1] - x[1])
    if edge == "isotropic":
        return isotropic_weight(x, d, window)
    ox = window.width - abs(y[0] - x[0])
    oy = window.height - abs(y[1] - x[1])
    return window.area() / (ox * oy)


def _nus(pattern, mark_sets, n):
    if mark_sets is None:
        return None, [1.0] * n
    sets = list(mark_sets)
    if n == 3 and len(sets) == 2:
        sets.append(sets[1])
    vals, tg = pattern.values, pattern.time_grid
    members = [s.evaluate(vals, tg) for s in sets]
    return members, [float(np.mean(m)) for m in members]


def naive_local_n2(pattern, i, testfun, rho, r_grid, edge="isotropic", mark_sets=None):
    """Double loop over ``j`` for every ``r``."""
    xy = pattern.xy
    marks = pattern.marks
    mean = MeanCurve.of(pattern.values, pattern.time_grid) if testfun.depends_on_sample else None
    members, nus = _nus(pattern, mark_sets, 2)
    out = np.zeros(len(r_grid))
    if members is not None and (not members[0][i] or min(nus) == 0):
        return out
    for b, r in enumerate(r_grid):
        s = 0.0
        for j in range(len(pattern)):
            if j == i:
                continue
            d = math.hypot(xy[j, 0] - xy[i, 0], xy[j, 1] - xy[i, 1])
            if d > r or (members is not None and not members[1][j]):
                continue
            t = testfun.pair(marks[i], marks[j], mean)
            s += edge_weight(xy[i], xy[j], pattern.window, edge) * t / (rho[i] * rho[j])
        out[b] = s / (nus[0] * nus[1])
    return out


def naive_local_n3(pattern, i, testfun, rho, r_grid, edge="isotropic", mark_sets=None):
    """Triple loop over ordered distinct neighbour pairs ``(j, l)``."""
    xy = pattern.xy
    marks = pattern.marks
    mean = MeanCurve.of(pattern.values, pattern.time_grid) if testfun.depends_on_sample else None
    members, nus = _nus(pattern, mark_sets, 3)
    out = np.zeros(len(r_grid))
    if members is not None and (not members[0][i] or min(nus) == 0):
        return out
    k = len(pattern)
    for b, r in enumerate(r_grid):
        s = 0.0
        for j in range(k):
            if j == i:
                continue
            dj = math.hypot(xy[j, 0] - xy[i, 0], xy[j, 1] - xy[i, 1])
            if dj > r or (members is not None and not members[1][j]):
                continue
            for l in range(k):
                if l in (i, j):
                    continue
                dl = math.hypot(xy[l, 0] - xy[i, 0], xy[l, 1] - xy[i, 1])
                if dl > r or (members is not None and not members[2][l]):
                    continue
                t = testfun.triple(marks[i], marks[j], marks[l], mean)
                w = (edge_weight(xy[i], xy[j], pattern.window, edge)
                     * edge_weight(xy[i], xy[l], pattern.window, edge))
                s += w * t / (rho[i] * rho[j] * rho[l])
        out[b] = s / (nus[0] * nus[1] * nus[2])
    return out


def circle_fraction_by_sampling(x, d, window, m=200_000):
    """Fraction of the circle about ``x`` inside ``window``, by dense arc sampling."""
    th = (np.arange(m) + 0.5) * (2 * np.pi / m)
    px = x[0] + d * np.cos(th)
    py = x[1] + d * np.sin(th)
    inside = ((px >= window.x_min) & (px <= window.x_max)
              & (py >= window.y_min) & (py <= window.y_max))
    return inside.mean()


def kernel_intensity_by_loops(data, u, h, window):
    """Gaussian kernel sum divided by the in-window kernel mass, computed by
    explicit loops and a midpoint grid for the mass."""
    out = []
    g = 400
    gx = window.x_min + (np.arange(g) + 0.5) * window.width / g
    gy = window.y_min + (np.arange(g) + 0.5) * window.height / g
    GX, GY = np.meshgrid(gx, gy)
    cell = window.area() / g ** 2
    for p in u:
        s = 0.0
        for q in data:
            s += math.exp(-((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2) / (2 * h * h))
        s /= 2 * math.pi * h * h
        mass = np.sum(np.exp(-((GX - p[0]) ** 2 + (GY - p[1]) ** 2) / (2 * h * h))) * cell
        mass /= 2 * math.pi * h * h
        out.append(max(s / mass, 1e-10))
    return np.array(out)
