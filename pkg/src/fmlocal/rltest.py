"""Monte Carlo tests of random labelling, local (per point) and global.

The ground pattern is fixed; only the marks are resampled. Intensity, the
neighbour structure and edge weights are therefore computed once and shared
by the observed pattern and all Q resampled ones.
"""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .core import MarkedPointPattern, PatternError
from .envelope import (ALTERNATIVES, CurveBundle, EnvelopeResult, envelope_bounds,
                       erl_p_values, global_envelope_test, holm_bonferroni)
from .intensity import (IntensityEstimate, constant_intensity, cvl_select_bandwidth,
                        kernel_intensity)
from .summaries import LocalKEngine, default_r_grid, edge_kind
from .testfun import TestFunction, parse_testfun

RESAMPLING = ("with_replacement", "without_replacement")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LocalTestConfig:
    Q: int = 39
    alpha: float = 0.1
    resampling: str = "with_replacement"
    testfun: str = "lp"
    p: float = 2.0
    bandwidth: str | float = "cvl"
    edge: str = "isotropic"
    n: int = 2
    r_max: float | None = None
    n_r: int = 50
    holm_bonferroni: bool = False
    seed: int = 0
    alternative: str = "two.sided"
    threads: int = 1

    def __post_init__(self):
        if self.Q < 1:
            raise ConfigError("Q must be >= 1")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.alpha * (self.Q + 1) < 1 - 1e-9:
            raise ConfigError("alpha * (Q + 1) must be >= 1")
        if self.resampling not in RESAMPLING:
            raise ConfigError(f"unknown resampling {self.resampling!r}")
        if self.n not in (2, 3):
            raise ConfigError("n must be 2 or 3")
        if self.alternative not in ALTERNATIVES:
            raise ConfigError(f"unknown alternative {self.alternative!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        parse_testfun(self.testfun, self.p)
        edge_kind(self.edge)
        if isinstance(self.bandwidth, str) and self.bandwidth not in ("cvl", "constant"):
            try:
                float(self.bandwidth)
            except ValueError:
                raise ConfigError(f"bad bandwidth {self.bandwidth!r}") from None

    @property
    def test_function(self) -> TestFunction:
        return parse_testfun(self.testfun, self.p)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("threads")
        d["testfun"] = self.test_function.label()
        d["edge"] = edge_kind(self.edge)
        return d


def substream(seed: int, q: int) -> np.random.Generator:
    """Generator for resample ``q``; independent of evaluation order."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(q),)))


def resample_indices(k: int, rng: np.random.Generator,
                     mode: str = "with_replacement") -> np.ndarray:
    if mode == "with_replacement":
        return rng.integers(0, k, size=k)
    if mode == "without_replacement":
        return rng.permutation(k)
    raise ConfigError(f"unknown resampling {mode!r}")


def resample_marks(pattern: MarkedPointPattern, rng: np.random.Generator,
                   mode: str = "with_replacement") -> MarkedPointPattern:
    """Same ground points, marks drawn from the original marks."""
    sigma = resample_indices(len(pattern), rng, mode)
    return pattern.with_marks([pattern.marks[s] for s in sigma])


def estimate_intensity(pattern: MarkedPointPattern, config: LocalTestConfig):
    """Return ``(estimate, bandwidth or None)`` for the configured scheme."""
    bw = config.bandwidth
    if bw == "constant":
        return constant_intensity(pattern), None
    if bw == "cvl":
        h = cvl_select_bandwidth(pattern)
    else:
        h = float(bw)
    return kernel_intensity(pattern, h), h


def _r_grid(pattern, config):
    return default_r_grid(pattern.window, config.n_r, config.r_max)


@dataclass
class LocalTestReport:
    xy: np.ndarray
    p_values: np.ndarray
    rejected: np.ndarray
    config: dict
    bandwidth: float | None
    r: np.ndarray
    observed: np.ndarray | None = None
    simulated: np.ndarray | None = None
    timings: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.p_values)

    @property
    def n_rejected(self) -> int:
        return int(self.rejected.sum())

    @property
    def rejection_fraction(self) -> float:
        return float(self.rejected.mean()) if len(self) else 0.0

    def records(self) -> list:
        return [{"index": i, "x": float(x), "y": float(y), "p_value": float(p),
                 "rejected": bool(rj)}
                for i, ((x, y), p, rj) in enumerate(zip(self.xy, self.p_values, self.rejected))]

    def to_dict(self) -> dict:
        return {"version": __version__, "config": self.config,
                "bandwidth": self.bandwidth,
                "summary": {"n_points": len(self), "n_rejected": self.n_rejected,
                            "rejection_fraction": self.rejection_fraction},
                "points": self.records()}

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "x", "y", "p_value", "rejected"])
            for rec in self.records():
                w.writerow([rec["index"], repr(rec["x"]), repr(rec["y"]),
                            repr(rec["p_value"]), int(rec["rejected"])])

    def envelope(self, i: int) -> EnvelopeResult:
        if self.simulated is None:
            raise ValueError("report was built without curves")
        bundle = CurveBundle(self.r, self.observed[i], self.simulated[:, i, :])
        return global_envelope_test(bundle, self.config["alpha"], self.config["alternative"])

    def write_envelopes_csv(self, path) -> None:
        """Per-point envelopes: ``index,r,observed,lower,upper``."""
        if self.simulated is None:
            raise ValueError("report was built without curves")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "r", "observed", "lower", "upper"])
            for i in range(len(self)):
                bundle = CurveBundle(self.r, self.observed[i], self.simulated[:, i, :])
                lo, hi = envelope_bounds(bundle, self.config["alpha"],
                                         self.config["alternative"])
                for r, o, a, b in zip(self.r, self.observed[i], lo, hi):
                    w.writerow([i, repr(float(r)), repr(float(o)), repr(float(a)),
                                repr(float(b))])


class _Runner:
    """Shared state for one pattern: intensity, engine, resample streams."""

    def __init__(self, pattern: MarkedPointPattern, config: LocalTestConfig,
                 intensity: IntensityEstimate | None = None):
        if len(pattern) < 2:
            raise PatternError("degenerate-pattern: need at least two points",
                               [("degenerate-pattern", [])])
        pattern.check()
        self.pattern = pattern
        self.config = config
        self.timings = {}
        t0 = time.perf_counter()
        if intensity is None:
            intensity, self.bandwidth = estimate_intensity(pattern, config)
        else:
            self.bandwidth = intensity.bandwidth
        self.intensity = intensity
        t1 = time.perf_counter()
        self.engine = LocalKEngine(pattern, config.test_function, intensity,
                                   _r_grid(pattern, config), config.edge, config.n)
        t2 = time.perf_counter()
        self.timings.update(intensity=t1 - t0, geometry=t2 - t1)

    def sigma(self, q: int) -> np.ndarray:
        return resample_indices(len(self.pattern), substream(self.config.seed, q),
                                self.config.resampling)

    def simulated_local(self) -> np.ndarray:
        def one(q):
            return self.engine.curves(self.sigma(q))
        t0 = time.perf_counter()
        if self.config.threads > 1:
            with ThreadPoolExecutor(self.config.threads) as ex:
                sims = list(ex.map(one, range(self.config.Q)))
        else:
            sims = [one(q) for q in range(self.config.Q)]
        self.timings["resample_curves"] = time.perf_counter() - t0
        return np.stack(sims)


def local_random_labelling_test(pattern: MarkedPointPattern, config: LocalTestConfig,
                                intensity: IntensityEstimate | None = None,
                                keep_curves: bool = False) -> LocalTestReport:
    """Per-point Monte Carlo test of random labelling.

    One set of Q resampled mark assignments serves every point. Point ``j``
    is tested with its observed local curve against its Q resampled curves.
    """
    run = _Runner(pattern, config, intensity)
    observed = run.engine.curves()
    sims = run.simulated_local()
    t0 = time.perf_counter()
    p = erl_p_values(observed, sims, config.alternative)
    if config.holm_bonferroni:
        rejected = holm_bonferroni(p, config.alpha)
    else:
        rejected = p <= config.alpha
    run.timings["envelopes"] = time.perf_counter() - t0
    return LocalTestReport(np.array(pattern.xy), p, rejected, config.echo(), run.bandwidth,
                           run.engine.r, observed if keep_curves else None,
                           sims if keep_curves else None, run.timings)


def global_random_labelling_test(pattern: MarkedPointPattern, config: LocalTestConfig,
                                 intensity: IntensityEstimate | None = None) -> EnvelopeResult:
    """Global envelope test on the global curve, same resampling scheme."""
    run = _Runner(pattern, config, intensity)
    eng = run.engine
    observed = eng.global_from_locals(eng.curves())
    sims = run.simulated_local()
    glob = np.stack([eng.global_from_locals(s) for s in sims])
    result = global_envelope_test(CurveBundle(eng.r, observed, glob), config.alpha,
                                  config.alternative)
    result.bandwidth = run.bandwidth
    result.timings = run.timings
    return result
