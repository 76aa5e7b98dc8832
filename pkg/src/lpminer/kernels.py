"""Kernel selection.

The Cython build is used when it imports; otherwise, or when
``LPMINER_PURE_PYTHON`` is set, the pure-Python implementations are used.
Both return identical results.
"""

from __future__ import annotations

import os

from . import _kernels_py

segment_log_py = _kernels_py.segment_log
determinize_safe_py = _kernels_py.determinize_safe
minimize_py = _kernels_py.minimize
segment_log_compiled = None
determinize_safe_compiled = None
minimize_compiled = None

try:
    from ._kernels import determinize_safe as determinize_safe_compiled  # type: ignore[no-redef]
    from ._kernels import minimize as minimize_compiled  # type: ignore[no-redef]
    from ._kernels import segment_log as segment_log_compiled  # type: ignore[no-redef]
except ImportError:  # pragma: no cover - depends on the build
    pass

if segment_log_compiled is not None and not os.environ.get("LPMINER_PURE_PYTHON"):
    segment_log = segment_log_compiled
    determinize_safe = determinize_safe_compiled
    minimize = minimize_compiled
    BACKEND = "cython"
else:
    segment_log = segment_log_py
    determinize_safe = determinize_safe_py
    minimize = minimize_py
    BACKEND = "python"

NOT_PROJECTED = _kernels_py.NOT_PROJECTED
NON_FITTING = _kernels_py.NON_FITTING
OK = _kernels_py.OK
UNSAFE = _kernels_py.UNSAFE
OVER_BUDGET = _kernels_py.OVER_BUDGET

__all__ = [
    "segment_log",
    "segment_log_py",
    "segment_log_compiled",
    "determinize_safe",
    "determinize_safe_py",
    "determinize_safe_compiled",
    "minimize",
    "minimize_py",
    "minimize_compiled",
    "BACKEND",
]
