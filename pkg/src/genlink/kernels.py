"""Hot inner-loop kernels, compiled when possible.

The Cython build (``genlink._kernels``) is preferred; set
``GENLINK_PURE_PYTHON=1`` to force the pure-Python fallback.
"""
import os

from genlink import _kernels_py

if os.environ.get("GENLINK_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from genlink import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

levenshtein = _impl.levenshtein
min_levenshtein = _impl.min_levenshtein
haversine = _impl.haversine
min_abs_difference = _impl.min_abs_difference
min_haversine = _impl.min_haversine


def backends() -> dict:
    """All importable kernel modules by name; used by tests and benchmarks."""
    out = {"python": _kernels_py}
    try:
        from genlink import _kernels

        out["cython"] = _kernels
    except ImportError:
        pass
    return out
