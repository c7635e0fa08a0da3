"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``QTWIN_PURE_PYTHON=1`` to force the numpy path.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
superop_1q = _kernels_py.superop_1q
superop_2q = _kernels_py.superop_2q

if os.environ.get("QTWIN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _ext
    except ImportError:  # extension not built
        _ext = None
    if _ext is not None:
        BACKEND = "cython"
        superop_1q = _ext.superop_1q
        superop_2q = _ext.superop_2q

# in-place kernels touch the matrix once; the numpy path holds ~2 extra copies
WORKSPACE_FACTOR = 1.0 if BACKEND == "cython" else 3.0
