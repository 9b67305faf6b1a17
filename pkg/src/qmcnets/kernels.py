"""Backend selection for the hot kernels.

The compiled Cython module is used when it was built; otherwise the numpy
fallback is imported.  Setting ``QMCNETS_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _fallback

if os.environ.get("QMCNETS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _fallback

BACKEND = "cython" if _impl is not _fallback else "python"

gray_points_b2 = _impl.gray_points_b2
gray_points = _impl.gray_points
pair_sums = _impl.pair_sums

__all__ = ["BACKEND", "gray_points_b2", "gray_points", "pair_sums", "fallback"]

fallback = _fallback
