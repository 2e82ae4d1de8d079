"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``SEQPI_PURE_PYTHON=1`` to force the fallback. Both backends return
bit-identical results.
"""

import os

from . import _kernels_py

BACKEND = "python"
path_min_ratio = _kernels_py.path_min_ratio
stream_min_ratio = _kernels_py.stream_min_ratio

if not os.environ.get("SEQPI_PURE_PYTHON"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        path_min_ratio = _kernels.path_min_ratio
        stream_min_ratio = _kernels.stream_min_ratio
        BACKEND = "cython"

__all__ = ["BACKEND", "path_min_ratio", "stream_min_ratio"]
