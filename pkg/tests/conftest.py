import numpy as np
import pytest

from fmlocal.core import MarkedPointPattern, Window


def random_pattern(k, rng, window=None, T=12, smooth=False):
    window = window or Window.unit()
    xy = np.column_stack([rng.uniform(window.x_min, window.x_max, k),
                          rng.uniform(window.y_min, window.y_max, k)])
    t = np.linspace(0.0, 1.0, T)
    vals = rng.normal(5.0, 0.3, (k, T))
    if smooth:
        vals = vals + np.sin(np.outer(rng.uniform(1, 4, k), t))
    return MarkedPointPattern.from_arrays(window, xy, vals, t)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_pattern(rng):
    return random_pattern(30, rng)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running reproduction checks")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
