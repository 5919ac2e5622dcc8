"""Scenario generators: ground processes, functional marks, superposition.

Ground models: homogeneous Poisson, inhomogeneous Poisson (thinning) with a
log-linear intensity, Thomas cluster process. Mark models: pure nugget
Gaussian noise, a non-separable space-time Gaussian field (dense Cholesky),
and seismic-like waveforms with a piecewise variance profile.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import linalg

from .core import MarkedPointPattern, Window

DEFAULT_MAX_JOINT_DIM = 6000
DUPLICATE_JITTER = 1e-9


class SimulationError(ValueError):
    pass


# -- ground processes --------------------------------------------------------

def _uniform(window: Window, n: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.uniform(window.x_min, window.x_max, n)
    y = rng.uniform(window.y_min, window.y_max, n)
    return np.column_stack([x, y])


def sim_homogeneous_poisson(window: Window, lam: float,
                            rng: np.random.Generator) -> np.ndarray:
    if not lam > 0:
        raise SimulationError("intensity must be positive")
    n = rng.poisson(lam * window.area())
    return _uniform(window, n, rng)


def sim_inhomogeneous_poisson(window: Window, rho, rho_max: float,
                              rng: np.random.Generator) -> np.ndarray:
    """Lewis-Shedler thinning of a Poisson(``rho_max``) proposal."""
    prop = sim_homogeneous_poisson(window, rho_max, rng)
    if len(prop) == 0:
        return prop
    vals = np.asarray(rho(prop), dtype=float)
    if np.any(vals > rho_max * (1 + 1e-12)):
        raise SimulationError("rho-exceeds-bound: intensity above rho_max")
    keep = rng.uniform(size=len(prop)) * rho_max < vals
    return prop[keep]


def sim_thomas(window: Window, kappa: float, sigma: float, mu: float,
               rng: np.random.Generator) -> np.ndarray:
    """Thomas process; parents live on the window dilated by ``4 sigma``."""
    if not (kappa > 0 and sigma > 0 and mu > 0):
        raise SimulationError("Thomas parameters must be positive")
    pad = 4.0 * sigma
    big = Window(window.x_min - pad, window.x_max + pad,
                 window.y_min - pad, window.y_max + pad)
    parents = sim_homogeneous_poisson(big, kappa, rng)
    counts = rng.poisson(mu, len(parents))
    kids = np.repeat(parents, counts, axis=0)
    kids = kids + rng.normal(0.0, sigma, kids.shape)
    kids = kids[window.contains(kids)] if len(kids) else kids.reshape(0, 2)
    return make_simple(kids, window, rng)


def make_simple(xy: np.ndarray, window: Window, rng: np.random.Generator) -> np.ndarray:
    """Jitter exact duplicate locations by ~1e-9 until all points are distinct."""
    xy = np.array(xy, dtype=float).reshape(-1, 2)
    for _ in range(100):
        _, first, counts = np.unique(xy, axis=0, return_index=True, return_counts=True)
        if np.all(counts == 1):
            return xy
        dup = np.setdiff1d(np.arange(len(xy)), first)
        xy[dup] += rng.uniform(-DUPLICATE_JITTER, DUPLICATE_JITTER, (len(dup), 2))
        xy[:, 0] = np.clip(xy[:, 0], window.x_min, window.x_max)
        xy[:, 1] = np.clip(xy[:, 1], window.y_min, window.y_max)
    raise SimulationError("could not separate duplicate points")


@dataclass(frozen=True)
class GroundModel:
    """Ground process description.

    kind ``homogeneous``: ``lam``. kind ``loglinear``: intensity
    ``exp(a + bx x + by y)``. kind ``thomas``: ``kappa``, ``sigma``, ``mu``.
    """

    kind: str = "homogeneous"
    lam: float = 200.0
    a: float = 3.5
    bx: float = 0.0
    by: float = 3.0
    kappa: float = 25.0
    sigma: float = 0.05
    mu: float = 7.0

    def rho(self, xy):
        xy = np.atleast_2d(xy)
        return np.exp(self.a + self.bx * xy[:, 0] + self.by * xy[:, 1])

    def rho_max(self, window: Window) -> float:
        x = window.x_max if self.bx > 0 else window.x_min
        y = window.y_max if self.by > 0 else window.y_min
        return float(np.exp(self.a + self.bx * x + self.by * y))

    def expected_count(self, window: Window) -> float:
        if self.kind == "homogeneous":
            return self.lam * window.area()
        if self.kind == "thomas":
            return self.kappa * self.mu * window.area()

        def strip(b, lo, hi):
            return hi - lo if b == 0 else (np.exp(b * hi) - np.exp(b * lo)) / b
        return float(np.exp(self.a) * strip(self.bx, window.x_min, window.x_max)
                     * strip(self.by, window.y_min, window.y_max))

    def scaled(self, window: Window, target: float) -> "GroundModel":
        """Same process family rescaled to ``target`` expected points on ``window``."""
        factor = target / self.expected_count(window)
        if self.kind == "homogeneous":
            return replace(self, lam=self.lam * factor)
        if self.kind == "thomas":
            return replace(self, kappa=self.kappa * factor)
        return replace(self, a=self.a + float(np.log(factor)))

    def simulate(self, window: Window, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "homogeneous":
            return sim_homogeneous_poisson(window, self.lam, rng)
        if self.kind == "loglinear":
            return sim_inhomogeneous_poisson(window, self.rho, self.rho_max(window), rng)
        if self.kind == "thomas":
            return sim_thomas(window, self.kappa, self.sigma, self.mu, rng)
        raise SimulationError(f"unknown ground model {self.kind!r}")


# -- functional marks --------------------------------------------------------

@dataclass(frozen=True)
class NonseparableCovariance:
    """``C(h, u) = var * (psi(u)+1)^(-delta/2) * phi(h / sqrt(psi(u)+1))``

    with ``psi(u) = |u|^alpha`` and ``phi(h) = exp(-(h/phi_scale)^2)``.
    """

    delta: float = 2.0
    alpha: float = 1.0
    phi_scale: float = 1.0
    variance: float = 1.0

    def __call__(self, h, u):
        s = np.abs(u) ** self.alpha + 1.0
        return self.variance * s ** (-self.delta / 2) * np.exp(-(h / self.phi_scale) ** 2 / s)


def joint_covariance(xy: np.ndarray, time_grid: np.ndarray,
                     cov: NonseparableCovariance) -> np.ndarray:
    """Joint covariance over (time, point) pairs, time-major ordering."""
    n, T = len(xy), len(time_grid)
    h2 = ((xy[:, None, 0] - xy[None, :, 0]) ** 2 + (xy[:, None, 1] - xy[None, :, 1]) ** 2)
    u = np.abs(time_grid[:, None] - time_grid[None, :])
    s = u ** cov.alpha + 1.0
    amp = cov.variance * s ** (-cov.delta / 2)
    scale2 = cov.phi_scale ** 2
    out = np.empty((n * T, n * T))
    for a in range(T):
        blk = amp[a][None, :, None] * np.exp(-h2[:, None, :] / (scale2 * s[a][None, :, None]))
        out[a * n:(a + 1) * n, :] = blk.reshape(n, T * n)
    return out


def cholesky_factor(cov_matrix: np.ndarray, jitter: float = 1e-8,
                    overwrite: bool = False) -> np.ndarray:
    c = cov_matrix if overwrite else cov_matrix.copy()
    c[np.diag_indices_from(c)] += jitter
    try:
        return linalg.cholesky(c, lower=True, overwrite_a=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SimulationError("not-positive-definite-after-jitter") from exc


def sim_gaussian_field_marks(xy, time_grid, mu: float, covariance, rng: np.random.Generator,
                             sigma2: float = 0.01,
                             max_joint_dim: int = DEFAULT_MAX_JOINT_DIM) -> np.ndarray:
    """Mark values ``(n, T)`` from ``Z(x, t) = mu + xi(x, t)``.

    ``covariance`` is ``"nugget"`` (iid noise with variance ``sigma2`` in
    space and time) or a :class:`NonseparableCovariance`.
    """
    xy = np.atleast_2d(np.asarray(xy, dtype=float)).reshape(-1, 2)
    t = np.asarray(time_grid, dtype=float)
    n, T = len(xy), len(t)
    if covariance == "nugget":
        return mu + np.sqrt(sigma2) * rng.standard_normal((n, T))
    if n == 0:
        return np.empty((0, T))
    if n * T > max_joint_dim:
        raise SimulationError(f"dimension-cap-exceeded: {n}x{T} > {max_joint_dim}")
    L = cholesky_factor(joint_covariance(xy, t, covariance), overwrite=True)
    z = L @ rng.standard_normal(n * T)
    return mu + z.reshape(T, n).T


def waveform_variance(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return 0.2 + 7.5 * (t > 0.4) - 5.0 * (t > 0.6)


def waveform_trend(t) -> np.ndarray:
    return 10.0 + 6.0 * np.sin(3.0 * np.pi * np.asarray(t, dtype=float))


def sim_waveform_marks(n: int, time_grid, rng: np.random.Generator,
                       trend: bool = False) -> np.ndarray:
    """Zero-mean (or trended) Gaussian waveforms with the variance-break profile."""
    t = np.asarray(time_grid, dtype=float)
    if t.min() < 0 or t.max() > 1:
        raise SimulationError("waveform time grid must lie in [0, 1]")
    vals = rng.standard_normal((n, len(t))) * np.sqrt(waveform_variance(t))
    if trend:
        vals = vals + waveform_trend(t)
    return vals


@dataclass(frozen=True)
class MarkingModel:
    """Mark model.

    kinds: ``nugget`` (``mu``, ``sigma2``), ``nonseparable`` (``mu``,
    ``delta``, ``alpha``, ``phi_scale``, with ``sigma2`` as the sill),
    ``waveform`` and ``waveform_trend``.
    Marks are sampled at ``n_times`` equispaced points of ``[t_min, t_max]``.
    """

    kind: str = "nugget"
    mu: float = 5.0
    sigma2: float = 0.01
    delta: float = 2.0
    alpha: float = 1.0
    phi_scale: float = 1.0
    t_min: float = 0.0
    t_max: float = 10.0
    n_times: int = 100

    @property
    def time_grid(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.n_times)

    def simulate(self, xy, rng: np.random.Generator,
                 max_joint_dim: int = DEFAULT_MAX_JOINT_DIM) -> np.ndarray:
        t = self.time_grid
        n = len(xy)
        if self.kind == "nugget":
            return sim_gaussian_field_marks(xy, t, self.mu, "nugget", rng, self.sigma2)
        if self.kind == "nonseparable":
            cov = NonseparableCovariance(self.delta, self.alpha, self.phi_scale, self.sigma2)
            return sim_gaussian_field_marks(xy, t, self.mu, cov, rng,
                                            max_joint_dim=max_joint_dim)
        if self.kind in ("waveform", "waveform_trend"):
            return sim_waveform_marks(n, t, rng, trend=self.kind == "waveform_trend")
        raise SimulationError(f"unknown marking model {self.kind!r}")


BASE_MARKS = MarkingModel("nugget", mu=5.0, sigma2=0.01)
MARKING_MODELS = {
    1: MarkingModel("nugget", mu=5.5, sigma2=0.01),
    2: MarkingModel("nugget", mu=5.0, sigma2=0.001),
    # sill matched to the base noise level; at sill 1 the feature marks are
    # outliers and resampling spreads them over the whole pattern
    3: MarkingModel("nonseparable", mu=5.0, sigma2=0.01),
}
GROUND_MODELS = {
    "homogeneous": GroundModel("homogeneous", lam=200.0),
    "inhomogeneous": GroundModel("loglinear", a=3.5, bx=0.0, by=3.0),
    "thomas": GroundModel("thomas", kappa=25.0, sigma=0.05, mu=7.0),
}
FEATURE_WINDOW = Window(0.0, 0.5, 0.0, 0.5)


# -- scenarios ---------------------------------------------------------------

@dataclass(frozen=True)
class FeatureSpec:
    ground: GroundModel
    marks: MarkingModel
    window: Window = FEATURE_WINDOW


@dataclass(frozen=True)
class ScenarioSpec:
    base_ground: GroundModel = field(default_factory=GroundModel)
    base_marks: MarkingModel = BASE_MARKS
    feature: FeatureSpec | None = None
    window: Window = field(default_factory=Window.unit)
    seed: int = 0
    max_joint_dim: int = DEFAULT_MAX_JOINT_DIM

    def __post_init__(self):
        if self.feature is not None and not self.window.contains_window(self.feature.window):
            raise SimulationError("feature window must lie inside the base window")
        if self.feature is not None and not np.array_equal(
                self.feature.marks.time_grid, self.base_marks.time_grid):
            raise SimulationError("base and feature marks need the same time grid")

    def to_dict(self) -> dict:
        d = {"base_ground": asdict(self.base_ground), "base_marks": asdict(self.base_marks),
             "window": self.window.to_dict(), "seed": int(self.seed),
             "max_joint_dim": int(self.max_joint_dim), "feature": None}
        if self.feature is not None:
            d["feature"] = {"ground": asdict(self.feature.ground),
                            "marks": asdict(self.feature.marks),
                            "window": self.feature.window.to_dict()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        feat = d.get("feature")
        feature = None
        if feat:
            feature = FeatureSpec(GroundModel(**feat["ground"]), MarkingModel(**feat["marks"]),
                                  Window.from_dict(feat.get("window", FEATURE_WINDOW.to_dict())))
        return cls(GroundModel(**d.get("base_ground", {})),
                   MarkingModel(**d.get("base_marks", asdict(BASE_MARKS))),
                   feature,
                   Window.from_dict(d.get("window", Window.unit().to_dict())),
                   int(d.get("seed", 0)),
                   int(d.get("max_joint_dim", DEFAULT_MAX_JOINT_DIM)))

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "ScenarioSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def table1_scenario(ground: str, marking: int | None, seed: int = 0,
                    max_joint_dim: int = 13000) -> ScenarioSpec:
    """Base pattern of ``ground`` kind plus a 50-point feature pattern in
    ``[0, 0.5]^2`` carrying marking model ``marking`` (None: no feature)."""
    if ground not in GROUND_MODELS:
        raise SimulationError(f"unknown ground {ground!r}; expected one of {sorted(GROUND_MODELS)}")
    if marking is not None and marking not in MARKING_MODELS:
        raise SimulationError(f"unknown marking model {marking!r}; expected 1, 2 or 3")
    base = GROUND_MODELS[ground]
    feature = None
    if marking is not None:
        feature = FeatureSpec(base.scaled(FEATURE_WINDOW, 50.0), MARKING_MODELS[marking])
    return ScenarioSpec(base, BASE_MARKS, feature, Window.unit(), seed, max_joint_dim)


def waveform_scenario(seed: int = 0, n_base: int = 250, n_feature: int | None = 50):
    """Seismic-like example: fixed-count uniform base points with variance-break
    waveforms, optionally a trended feature pattern in ``[0, 0.5]^2``."""
    rng = np.random.default_rng(seed)
    W = Window.unit()
    t = np.linspace(0.0, 1.0, 100)
    xy = _uniform(W, n_base, rng)
    vals = sim_waveform_marks(n_base, t, rng)
    labels = np.zeros(n_base, dtype=np.int8)
    if n_feature:
        fxy = _uniform(FEATURE_WINDOW, n_feature, rng)
        xy = np.vstack([xy, fxy])
        vals = np.vstack([vals, sim_waveform_marks(n_feature, t, rng, trend=True)])
        labels = np.concatenate([labels, np.ones(n_feature, dtype=np.int8)])
    xy = make_simple(xy, W, rng)
    return MarkedPointPattern.from_arrays(W, xy, vals, t), labels


def sim_scenario(spec: ScenarioSpec):
    """Simulate a scenario; returns ``(pattern, labels)`` with label 1 for
    feature-origin points and 0 for base points."""
    ss = np.random.SeedSequence(int(spec.seed))
    g_base, m_base, g_feat, m_feat, jit = (np.random.default_rng(s) for s in ss.spawn(5))
    xy_b = spec.base_ground.simulate(spec.window, g_base)
    vals_b = spec.base_marks.simulate(xy_b, m_base, spec.max_joint_dim)
    labels = np.zeros(len(xy_b), dtype=np.int8)
    xy, vals = xy_b, vals_b
    if spec.feature is not None:
        xy_f = spec.feature.ground.simulate(spec.feature.window, g_feat)
        vals_f = spec.feature.marks.simulate(xy_f, m_feat, spec.max_joint_dim)
        xy = np.vstack([xy_b, xy_f])
        vals = np.vstack([vals_b.reshape(len(xy_b), -1), vals_f.reshape(len(xy_f), -1)])
        labels = np.concatenate([labels, np.ones(len(xy_f), dtype=np.int8)])
    xy = make_simple(xy, spec.window, jit)
    vals = vals.reshape(len(xy), len(spec.base_marks.time_grid))
    pattern = MarkedPointPattern.from_arrays(spec.window, xy, vals, spec.base_marks.time_grid)
    return pattern, labels
