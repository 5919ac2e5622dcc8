import numpy as np
import pytest

from fmlocal.core import Window, validate
from fmlocal.simulate import (GROUND_MODELS, MARKING_MODELS, GroundModel, MarkingModel,
                              NonseparableCovariance, ScenarioSpec, SimulationError,
                              cholesky_factor, joint_covariance, sim_gaussian_field_marks,
                              sim_homogeneous_poisson, sim_inhomogeneous_poisson, sim_scenario,
                              sim_thomas, sim_waveform_marks, table1_scenario,
                              waveform_variance)

W = Window.unit()


class TestPoisson:
    def test_mean_and_dispersion(self):
        rng = np.random.default_rng(1)
        counts = np.array([len(sim_homogeneous_poisson(W, 200, rng)) for _ in range(1000)])
        assert abs(counts.mean() - 200) <= 3 * np.sqrt(200 / 1000)
        assert abs(counts.var() / counts.mean() - 1) <= 0.15

    def test_seed(self):
        a = sim_homogeneous_poisson(W, 50, np.random.default_rng(9))
        b = sim_homogeneous_poisson(W, 50, np.random.default_rng(9))
        np.testing.assert_array_equal(a, b)


class TestInhomogeneous:
    def test_expected_count(self):
        g = GROUND_MODELS["inhomogeneous"]
        expected = np.exp(3.5) * (np.exp(3) - 1) / 3
        assert g.expected_count(W) == pytest.approx(expected, rel=1e-6)
        rng = np.random.default_rng(2)
        sims = [g.simulate(W, rng) for _ in range(500)]
        assert abs(np.mean([len(s) for s in sims]) / expected - 1) <= 0.05
        low = np.mean([np.sum(s[:, 1] < 0.5) for s in sims])
        high = np.mean([np.sum(s[:, 1] >= 0.5) for s in sims])
        ratio = (np.exp(1.5) - 1) / (np.exp(3) - np.exp(1.5))
        assert low < high
        assert low / high == pytest.approx(ratio, rel=0.1)

    def test_constant_rho(self):
        rng = np.random.default_rng(3)
        counts = [len(sim_inhomogeneous_poisson(W, lambda xy: np.full(len(xy), 100.0), 100.0,
                                                rng)) for _ in range(300)]
        assert abs(np.mean(counts) - 100) <= 3 * np.sqrt(100 / 300)

    def test_bound_violation(self):
        with pytest.raises(SimulationError):
            sim_inhomogeneous_poisson(W, lambda xy: np.full(len(xy), 10.0), 5.0,
                                      np.random.default_rng(0))


class TestThomas:
    def test_mean_count(self):
        rng = np.random.default_rng(4)
        counts = [len(sim_thomas(W, 25, 0.05, 7, rng)) for _ in range(300)]
        assert np.mean(counts) == pytest.approx(175, rel=0.08)

    def test_clustering(self):
        rng = np.random.default_rng(5)
        close, expected = 0, 0.0
        r = 0.03
        for _ in range(100):
            xy = sim_thomas(W, 25, 0.05, 7, rng)
            d = np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1))
            close += (np.sum(d <= r) - len(xy)) / 2
            n = len(xy)
            expected += n * (n - 1) / 2 * np.pi * r * r
        assert close / expected > 1

    def test_tiny_sigma_jittered(self):
        xy = sim_thomas(W, 25, 1e-300, 7, np.random.default_rng(6))
        assert len(np.unique(xy, axis=0)) == len(xy)


class TestMarks:
    def test_nugget_moments(self):
        rng = np.random.default_rng(7)
        xy = rng.uniform(size=(200, 2))
        t = np.linspace(0, 10, 100)
        v = sim_gaussian_field_marks(xy, t, 5.0, "nugget", rng, 0.01)
        assert abs(v.mean() - 5) <= 3 * np.sqrt(0.01 / 20000)

    def test_nugget_independence(self):
        rng = np.random.default_rng(8)
        xy = rng.uniform(size=(2, 2))
        t = np.linspace(0, 10, 100)
        draws = np.array([sim_gaussian_field_marks(xy, t, 5.0, "nugget", rng, 0.01)
                          for _ in range(100)])
        # pooled over draws and times
        assert abs(np.corrcoef(draws[:, 0].ravel(), draws[:, 1].ravel())[0, 1]) < 0.05

    def test_nonseparable_unit_variance(self):
        cov = NonseparableCovariance()
        assert cov(0.0, 0.0) == 1.0
        rng = np.random.default_rng(9)
        xy = rng.uniform(size=(5, 2))
        t = np.linspace(0, 10, 20)
        draws = np.array([sim_gaussian_field_marks(xy, t, 0.0, cov, rng)[2, 7]
                          for _ in range(200)])
        assert draws.var() == pytest.approx(1.0, rel=0.2)

    def test_cholesky_reconstruction(self):
        rng = np.random.default_rng(10)
        xy = rng.uniform(size=(25, 2))
        t = np.linspace(0, 10, 20)
        c = joint_covariance(xy, t, NonseparableCovariance())
        L = cholesky_factor(c)
        assert np.max(np.abs(L @ L.T - c)) <= 1e-6

    def test_dimension_cap(self):
        xy = np.random.default_rng(0).uniform(size=(70, 2))
        with pytest.raises(SimulationError):
            sim_gaussian_field_marks(xy, np.linspace(0, 10, 100), 0.0,
                                     NonseparableCovariance(), np.random.default_rng(0))

    def test_model3_sill(self):
        m = MARKING_MODELS[3]
        rng = np.random.default_rng(11)
        xy = rng.uniform(size=(4, 2))
        v = np.array([m.simulate(xy, rng)[:, 50] for _ in range(300)])
        assert v.var() == pytest.approx(m.sigma2, rel=0.2)

    def test_waveform_variance(self):
        np.testing.assert_allclose(waveform_variance([0.3, 0.5, 0.7]), [0.2, 7.7, 2.7])
        rng = np.random.default_rng(12)
        t = np.array([0.3, 0.5, 0.7])
        v = sim_waveform_marks(500, t, rng)
        np.testing.assert_allclose(v.var(axis=0), [0.2, 7.7, 2.7], rtol=0.15)
        assert np.all(np.abs(v.mean(axis=0)) < 3 * np.sqrt(7.7 / 500))

    def test_waveform_trend(self):
        rng = np.random.default_rng(13)
        t = np.array([0.1, 0.5, 0.9])
        v = sim_waveform_marks(500, t, rng, trend=True)
        np.testing.assert_allclose(v.mean(axis=0), 10 + 6 * np.sin(3 * np.pi * t), rtol=0.1)


class TestScenario:
    def test_counts_and_labels(self):
        inside, outside = [], []
        for s in range(40):
            p, lab = sim_scenario(table1_scenario("homogeneous", 1, seed=s))
            assert validate(p) == []
            assert len(lab) == len(p)
            sub = (p.xy[:, 0] <= 0.5) & (p.xy[:, 1] <= 0.5)
            inside.append(sub.sum())
            outside.append((~sub).sum())
            assert np.all(sub[lab == 1])
        assert np.mean(inside) == pytest.approx(100, rel=0.1)
        assert np.mean(outside) == pytest.approx(150, rel=0.1)

    def test_no_feature(self):
        p, lab = sim_scenario(table1_scenario("thomas", None, seed=1))
        assert np.all(lab == 0)

    def test_deterministic(self):
        spec = table1_scenario("inhomogeneous", 3, seed=5)
        a, la = sim_scenario(spec)
        b, lb = sim_scenario(spec)
        np.testing.assert_array_equal(a.xy, b.xy)
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(la, lb)

    def test_json_round_trip(self, tmp_path):
        spec = table1_scenario("thomas", 2, seed=3)
        spec.to_json(tmp_path / "s.json")
        assert ScenarioSpec.from_json(tmp_path / "s.json") == spec

    def test_feature_scaling(self):
        for name, g in GROUND_MODELS.items():
            assert g.scaled(Window(0, 0.5, 0, 0.5), 50.0).expected_count(
                Window(0, 0.5, 0, 0.5)) == pytest.approx(50.0, rel=1e-6), name

    def test_waveform_marking_model(self):
        m = MarkingModel("waveform", t_min=0, t_max=1)
        v = m.simulate(np.zeros((3, 2)), np.random.default_rng(0))
        assert v.shape == (3, 100)

    def test_unknown_kind(self):
        with pytest.raises(SimulationError):
            MarkingModel("brownian").simulate(np.zeros((2, 2)), np.random.default_rng(0))
        with pytest.raises((SimulationError, ValueError)):
            GroundModel("cox").simulate(W, np.random.default_rng(0))
