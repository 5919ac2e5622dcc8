"""Backend selection for the accumulation kernels.

The compiled extension is used when importable. Setting
``FMLOCAL_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("FMLOCAL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

accumulate_n2 = _impl.accumulate_n2
accumulate_n3 = _impl.accumulate_n3


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (``"cython"`` or ``"python"``)."""
    if name in (None, BACKEND):
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
