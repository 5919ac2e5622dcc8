"""Local t-weighted marked K-functions for functional marked point patterns
and local Monte Carlo tests of random labelling."""

__version__ = "0.1.0"

from .core import (FunctionalMark, MarkedPointPattern, MarkSet, PatternError, Window,
                   pairwise_distances, read_pattern, restrict, validate, write_pattern)
from .envelope import CurveBundle, EnvelopeResult, envelope_bounds, erl_p_value
from .intensity import constant_intensity, cvl_select_bandwidth, kernel_intensity
from .kernels import BACKEND
from .rltest import (LocalTestConfig, LocalTestReport, global_random_labelling_test,
                     local_random_labelling_test, resample_marks)
from .summaries import LocalKEngine, SummaryCurve, global_k, local_k
from .testfun import TestFunction

__all__ = [
    "BACKEND", "CurveBundle", "EnvelopeResult", "FunctionalMark", "LocalKEngine",
    "LocalTestConfig", "LocalTestReport", "MarkSet", "MarkedPointPattern", "PatternError",
    "SummaryCurve", "TestFunction", "Window", "constant_intensity", "cvl_select_bandwidth",
    "envelope_bounds", "erl_p_value", "global_k", "global_random_labelling_test",
    "kernel_intensity", "local_k", "local_random_labelling_test", "pairwise_distances",
    "read_pattern", "resample_marks", "restrict", "validate", "write_pattern",
]
