import numpy as np
import pytest

from fmlocal import kernels
from fmlocal.summaries import LocalKEngine
from fmlocal.testfun import TestFunction

from conftest import random_pattern

cython = pytest.importorskip("fmlocal._kernels")


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("kind", ["lp", "constant_one", "variogram"])
def test_backends_bit_identical(n, kind, rng):
    p = random_pattern(60 if n == 2 else 25, rng, T=6)
    sigma = rng.integers(0, len(p), len(p))
    tf = TestFunction(kind)
    a = LocalKEngine(p, tf, n=n, backend="cython").curves(sigma)
    b = LocalKEngine(p, tf, n=n, backend="python").curves(sigma)
    np.testing.assert_array_equal(a, b)


def test_backend_selection():
    assert kernels.BACKEND in ("cython", "python")
    assert kernels.get_backend("python").__name__.endswith("_kernels_py")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_subset_rows(rng):
    p = random_pattern(40, rng, T=4)
    eng = LocalKEngine(p, TestFunction(), backend="cython")
    full = eng.curves()
    np.testing.assert_array_equal(eng.curves(rows=[5, 2]), full[[5, 2]])
