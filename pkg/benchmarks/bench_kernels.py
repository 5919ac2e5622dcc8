"""Compare the compiled and pure-Python accumulation kernels.

Times ``LocalKEngine.curves`` (all local curves of a pattern) for both
backends and checks that they agree. Usage::

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from fmlocal.core import MarkedPointPattern, Window
from fmlocal.intensity import kernel_intensity
from fmlocal.summaries import LocalKEngine
from fmlocal.testfun import TestFunction

CASES = [(2, 250), (2, 1000), (3, 100), (3, 250)]


def make_pattern(k: int, seed: int = 0) -> MarkedPointPattern:
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, 50)
    return MarkedPointPattern.from_arrays(Window.unit(), rng.uniform(size=(k, 2)),
                                          rng.normal(5.0, 0.3, (k, 50)), t)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'n':>2} {'points':>7} {'cython [s]':>11} {'python [s]':>11} {'speedup':>8}")
    for n, k in CASES:
        p = make_pattern(k)
        est = kernel_intensity(p, 0.1)
        tf = TestFunction("lp")
        engines = {b: LocalKEngine(p, tf, est, None, "isotropic", n, backend=b)
                   for b in ("cython", "python")}
        a, b = engines["cython"].curves(), engines["python"].curves()
        assert np.array_equal(a, b), "backends disagree"
        times = {name: min(timeit.repeat(eng.curves, number=1, repeat=args.repeat))
                 for name, eng in engines.items()}
        print(f"{n:>2} {k:>7} {times['cython']:>11.4f} {times['python']:>11.4f} "
              f"{times['python'] / times['cython']:>7.1f}x")


if __name__ == "__main__":
    main()
