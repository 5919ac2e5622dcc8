import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmlocal.core import MarkedPointPattern, MarkSet, Window
from fmlocal.intensity import IntensityEstimate, constant_intensity, kernel_intensity
from fmlocal.summaries import (EstimatorError, LocalKEngine, all_local_k, default_r_grid,
                               global_k, isotropic_fraction, isotropic_weight,
                               isotropic_weights, local_k, translation_weight)
from fmlocal.testfun import KINDS, TestFunction

from conftest import random_pattern
from naive import circle_fraction_by_sampling, naive_local_n2, naive_local_n3

EDGES = ("none", "isotropic", "translation")


def _flat(level, window=None):
    return IntensityEstimate("constant", window or Window.unit(), level=level)


class TestIsotropic:
    def test_center(self):
        assert isotropic_weight([0.5, 0.5], 0.2, Window.unit()) == 1.0

    def test_side_midpoint(self):
        assert isotropic_weight([0.5, 0.0], 0.2, Window.unit()) == pytest.approx(2.0, rel=1e-14)

    def test_corner(self):
        assert isotropic_weight([0.0, 0.0], 0.1, Window.unit()) == pytest.approx(4.0, rel=1e-14)

    def test_zero_distance(self):
        with pytest.raises(EstimatorError):
            isotropic_weight([0.5, 0.5], 0.0, Window.unit())

    def test_cap(self):
        w, capped = isotropic_weights(np.array([[0.0, 0.0]]), np.array([1.4]), Window.unit())
        assert w[0] == 10.0 and capped[0]

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0, 2), st.floats(0, 1), st.floats(0.01, 1.2))
    def test_fraction_vs_arc_sampling(self, x, y, d):
        W = Window(0, 2, 0, 1)
        got = isotropic_fraction(np.array([[x, y]]), d, W)[0]
        assert got == pytest.approx(circle_fraction_by_sampling((x, y), d, W, 40_000), abs=1e-3)


class TestTranslation:
    def test_same_point(self):
        assert translation_weight([0.3, 0.3], [0.3, 0.3], Window.unit()) == 1.0

    def test_examples(self):
        assert translation_weight([0.1, 0.2], [0.6, 0.2], Window.unit()) == pytest.approx(2.0)
        assert translation_weight([0.1, 0.2], [0.6, 0.7], Window.unit()) == pytest.approx(4.0)

    def test_out_of_range(self):
        with pytest.raises(EstimatorError):
            translation_weight([0.0, 0.0], [1.0, 0.5], Window.unit())


def test_two_point_hand_value():
    p = MarkedPointPattern.from_arrays(Window.unit(), [[0.4, 0.5], [0.5, 0.5]],
                                       np.zeros((2, 3)), [0, 1, 2])
    r = np.array([0.05, 0.0999, 0.1, 0.2])
    c = local_k(p, 0, TestFunction("constant_one"), _flat(2.0), r, edge="none")
    np.testing.assert_array_equal(c.values, [0, 0, 0.25, 0.25])


def test_isolated_point_zero():
    p = MarkedPointPattern.from_arrays(Window.unit(), [[0.5, 0.5]], np.zeros((1, 3)), [0, 1, 2])
    assert np.all(local_k(p, 0, TestFunction("lp")).values == 0)
    assert np.all(global_k(p, TestFunction("lp")).values == 0)


def test_bad_index(small_pattern):
    with pytest.raises(EstimatorError):
        local_k(small_pattern, len(small_pattern), TestFunction())


def test_bad_r_grid(small_pattern):
    with pytest.raises(EstimatorError):
        LocalKEngine(small_pattern, TestFunction(), r_grid=[0.1, 0.05])
    with pytest.raises(EstimatorError):
        default_r_grid(Window.unit(), 10, 0.0)


@pytest.mark.parametrize("edge", EDGES)
@pytest.mark.parametrize("kind", KINDS)
def test_n2_oracle(edge, kind, rng):
    p = random_pattern(30, rng, Window(0, 1.5, 0, 1), T=8, smooth=True)
    tf = TestFunction(kind, 2.0)
    est = kernel_intensity(p, 0.2)
    r = default_r_grid(p.window, 15)
    eng = LocalKEngine(p, tf, est, r, edge)
    rho = est(p.xy)
    for i in range(len(p)):
        naive = naive_local_n2(p, i, tf, rho, r, edge)
        got = eng.curves(rows=[i])[0]
        assert np.max(np.abs(got - naive)) <= 1e-12 * max(1.0, np.max(np.abs(naive)))


@pytest.mark.parametrize("edge", EDGES)
@pytest.mark.parametrize("kind", ["lp", "variogram", "constant_one"])
def test_n3_oracle(edge, kind, rng):
    p = random_pattern(14, rng, T=6, smooth=True)
    tf = TestFunction(kind)
    est = kernel_intensity(p, 0.15)
    r = default_r_grid(p.window, 8, 0.3)
    eng = LocalKEngine(p, tf, est, r, edge, n=3)
    rho = est(p.xy)
    for i in range(len(p)):
        naive = naive_local_n3(p, i, tf, rho, r, edge)
        got = eng.curves(rows=[i])[0]
        assert np.max(np.abs(got - naive)) <= 1e-10 * max(1.0, np.max(np.abs(naive)))


@pytest.mark.parametrize("n", [2, 3])
def test_mark_sets_oracle(n, rng):
    p = random_pattern(16, rng, T=6, smooth=True)
    E = MarkSet.mean_at_least(5.2)
    E1 = MarkSet.sup_in_interval(0.0, 0.5, 5.5)
    tf = TestFunction("lp")
    r = default_r_grid(p.window, 6, 0.3)
    eng = LocalKEngine(p, tf, None, r, "isotropic", n, (E, E1))
    rho = constant_intensity(p)(p.xy)
    oracle = naive_local_n2 if n == 2 else naive_local_n3
    for i in range(len(p)):
        naive = oracle(p, i, tf, rho, r, "isotropic", (E, E1))
        np.testing.assert_allclose(eng.curves(rows=[i])[0], naive, rtol=1e-10, atol=1e-300)


def test_empty_mark_set_gives_zero(small_pattern):
    never = MarkSet("none", lambda v, t: False)
    eng = LocalKEngine(small_pattern, TestFunction(), mark_sets=(MarkSet.all_marks(), never))
    assert np.all(eng.curves() == 0)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("edge", EDGES)
def test_aggregation_identity(n, edge, rng):
    p = random_pattern(25, rng, T=5)
    tf = TestFunction("lp")
    g = global_k(p, tf, edge=edge, n=n).values
    r, loc = all_local_k(p, tf, edge=edge, n=n)
    acc = np.zeros(len(r))
    for row in loc:
        acc = acc + row
    np.testing.assert_array_equal(g, acc / p.window.area())


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**31), st.sampled_from(EDGES),
       st.sampled_from(["lp", "supremum", "lp_derivative", "constant_one"]))
def test_monotone_for_nonnegative_t(k, seed, edge, kind):
    p = random_pattern(k, np.random.default_rng(seed), T=5)
    _, loc = all_local_k(p, TestFunction(kind), edge=edge)
    assert np.all(np.diff(loc, axis=1) >= 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**31), st.sampled_from(EDGES), st.sampled_from([2, 3]))
def test_mark_blind_permutation(k, seed, edge, n):
    rng = np.random.default_rng(seed)
    p = random_pattern(k, rng, T=5)
    q = p.with_marks([p.marks[s] for s in rng.permutation(k)])
    tf = TestFunction("constant_one")
    np.testing.assert_array_equal(all_local_k(p, tf, edge=edge, n=n)[1],
                                  all_local_k(q, tf, edge=edge, n=n)[1])
    np.testing.assert_array_equal(global_k(p, tf, edge=edge, n=n).values,
                                  global_k(q, tf, edge=edge, n=n).values)


def test_isotropic_equals_none_away_from_edges(rng):
    xy = rng.uniform(0.375, 0.625, size=(30, 2))
    p = MarkedPointPattern.from_arrays(Window.unit(), xy, rng.normal(size=(30, 4)),
                                       np.arange(4.0))
    r = np.linspace(0, 0.1, 20)
    for tf in (TestFunction("lp"), TestFunction("constant_one")):
        np.testing.assert_array_equal(all_local_k(p, tf, r_grid=r, edge="isotropic")[1],
                                      all_local_k(p, tf, r_grid=r, edge="none")[1])


def test_sigma_matches_resampled_pattern(rng):
    p = random_pattern(40, rng, T=6)
    sigma = rng.integers(0, 40, 40)
    q = p.with_marks([p.marks[s] for s in sigma])
    for kind in ("lp", "variogram"):
        tf = TestFunction(kind)
        eng = LocalKEngine(p, tf, constant_intensity(p))
        np.testing.assert_allclose(eng.curves(sigma),
                                   LocalKEngine(q, tf, constant_intensity(p)).curves(),
                                   rtol=1e-12, atol=0)


def test_cap_flag():
    xy = np.array([[0.0, 0.0], [0.95, 0.95], [0.2, 0.2]])
    p = MarkedPointPattern.from_arrays(Window.unit(), xy, np.zeros((3, 2)), [0, 1])
    assert global_k(p, TestFunction(), r_grid=np.linspace(0, 1.4, 5)).flags["cap_binds"]
    assert not global_k(p, TestFunction(), r_grid=np.linspace(0, 0.05, 5)).flags["cap_binds"]


def test_poisson_pi_r2_quick():
    from fmlocal.simulate import sim_homogeneous_poisson
    rng = np.random.default_rng(3)
    r = np.array([0.05, 0.1, 0.15])
    acc = np.zeros(3)
    for _ in range(20):
        xy = sim_homogeneous_poisson(Window.unit(), 200, rng)
        p = MarkedPointPattern.from_arrays(Window.unit(), xy, np.zeros((len(xy), 2)), [0, 1])
        acc += global_k(p, TestFunction("constant_one"), r_grid=r).values
    np.testing.assert_allclose(acc / 20, np.pi * r ** 2, rtol=0.15)
