"""Global envelope tests with extreme rank length (ERL) ordering.

Every curve (observed first, then the Q simulations) gets a pointwise rank
among all Q + 1 curves; small ranks are extreme. A curve's sorted rank vector
orders curves lexicographically: its first entry is the extreme rank and the
remaining entries break ties (extreme rank length).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

ALTERNATIVES = ("two.sided", "greater", "less")


class EnvelopeError(ValueError):
    pass


@dataclass
class CurveBundle:
    r: np.ndarray
    observed: np.ndarray
    simulated: np.ndarray  # (Q, len(r))

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.observed = np.asarray(self.observed, dtype=float)
        self.simulated = np.atleast_2d(np.asarray(self.simulated, dtype=float))
        if self.simulated.shape[0] < 1:
            raise EnvelopeError("need at least one simulated curve")
        if (self.observed.shape != self.r.shape
                or self.simulated.shape[1:] != self.r.shape):
            raise EnvelopeError("grid-mismatch: curves and r grid differ in length")
        if not (np.isfinite(self.observed).all() and np.isfinite(self.simulated).all()):
            raise EnvelopeError("curves must be finite")

    @property
    def Q(self) -> int:
        return self.simulated.shape[0]

    def stacked(self) -> np.ndarray:
        return np.vstack([self.observed[None, :], self.simulated])


@dataclass
class EnvelopeResult:
    r: np.ndarray
    observed: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    p_value: float
    erl_observed: float
    rejected: bool
    alpha: float
    Q: int
    alternative: str = "two.sided"
    measure: str = "erl"

    def to_dict(self) -> dict:
        return {"measure": self.measure, "p_value": self.p_value, "Q": self.Q,
                "alpha": self.alpha, "alternative": self.alternative,
                "rejected": bool(self.rejected), "erl_observed": self.erl_observed}


def pointwise_ranks(curves: np.ndarray, alternative: str = "two.sided") -> np.ndarray:
    """Ranks along axis -2 (the curve axis); 1 is most extreme.

    ``curves`` has shape ``(..., N, R)``. Ties share the less extreme rank.
    """
    if alternative not in ALTERNATIVES:
        raise EnvelopeError(f"unknown alternative {alternative!r}")
    n = curves.shape[-2]
    # number of curves <= / >= each value
    below = rankdata(curves, method="max", axis=-2).astype(np.int64)
    above = (n + 1 - rankdata(curves, method="min", axis=-2)).astype(np.int64)
    if alternative == "greater":
        return above
    if alternative == "less":
        return below
    return np.minimum(below, above)


def erl_keys(curves: np.ndarray, alternative: str = "two.sided") -> np.ndarray:
    """Sorted pointwise rank vectors; lexicographically smaller = more extreme."""
    return np.sort(pointwise_ranks(curves, alternative), axis=-1)


def _at_least_as_extreme(keys: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Rows of ``keys`` lexicographically <= ``ref`` (broadcast over leading axes)."""
    diff = keys - ref
    nz = diff != 0
    first = np.argmax(nz, axis=-1)
    val = np.take_along_axis(diff, first[..., None], axis=-1)[..., 0]
    return ~nz.any(axis=-1) | (val < 0)


def erl_p_values(observed: np.ndarray, simulated: np.ndarray,
                 alternative: str = "two.sided") -> np.ndarray:
    """Batch ERL p-values.

    ``observed`` is ``(k, R)`` and ``simulated`` is ``(Q, k, R)``: one test
    per row of ``observed``.
    """
    observed = np.asarray(observed, dtype=float)
    simulated = np.asarray(simulated, dtype=float)
    Q = simulated.shape[0]
    curves = np.concatenate([observed[None], simulated], axis=0)  # (Q+1, k, R)
    curves = np.moveaxis(curves, 0, 1)  # (k, Q+1, R)
    keys = erl_keys(curves, alternative)
    hits = _at_least_as_extreme(keys[:, 1:, :], keys[:, :1, :])
    return (1.0 + hits.sum(axis=1)) / (Q + 1.0)


def erl_p_value(bundle: CurveBundle, alternative: str = "two.sided") -> float:
    return float(erl_p_values(bundle.observed[None], bundle.simulated[:, None, :],
                              alternative)[0])


def envelope_bounds(bundle: CurveBundle, alpha: float,
                    alternative: str = "two.sided"):
    """Global envelope at level ``alpha``.

    The ``floor(alpha (Q+1))`` most extreme curves among all Q + 1 (ERL
    order) are dropped and the bounds are the pointwise min/max of the rest.
    When the observed curve is itself among the dropped ones, this is the
    band of the simulations left after discarding ``floor(alpha (Q+1)) - 1``
    of them. The observed curve exits the band iff its p-value is <= alpha
    (absent ties).
    """
    if not 0 < alpha < 1:
        raise EnvelopeError("alpha must lie in (0, 1)")
    Q = bundle.Q
    k_crit = int(np.floor(alpha * (Q + 1) + 1e-9))
    if k_crit < 1:
        raise EnvelopeError(f"alpha-too-small-for-Q: alpha={alpha}, Q={Q}")
    curves = bundle.stacked()
    keys = erl_keys(curves, alternative)
    # most extreme first; equal keys keep index order (observed first)
    order = np.lexsort(keys.T[::-1])
    keep = np.sort(order[k_crit:])
    kept = curves[keep]
    return kept.min(axis=0), kept.max(axis=0)


def global_envelope_test(bundle: CurveBundle, alpha: float = 0.1,
                         alternative: str = "two.sided") -> EnvelopeResult:
    keys = erl_keys(bundle.stacked(), alternative)
    p = erl_p_value(bundle, alternative)
    lower, upper = envelope_bounds(bundle, alpha, alternative)
    erl_obs = float((bundle.Q + 1 - _at_least_as_extreme(keys, keys[0]).sum())
                    / (bundle.Q + 1))
    return EnvelopeResult(bundle.r, bundle.observed, lower, upper, p, erl_obs,
                          bool(p <= alpha), alpha, bundle.Q, alternative)


def holm_bonferroni(p_values, alpha: float) -> np.ndarray:
    """Holm step-down rejections at family-wise level ``alpha``."""
    p = np.asarray(p_values, dtype=float)
    m = p.size
    order = np.argsort(p, kind="stable")
    reject = np.zeros(m, dtype=bool)
    for step, idx in enumerate(order):
        if p[idx] <= alpha / (m - step):
            reject[idx] = True
        else:
            break
    return reject
