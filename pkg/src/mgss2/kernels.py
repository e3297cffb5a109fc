"""Select the compiled kernels when available, else the pure-Python ones.

Set ``MGSS2_PURE=1`` to force the fallback (used by the benchmark and by the
cross-implementation tests).
"""
import os

from . import _fallback

BACKEND = "python"
if not os.environ.get("MGSS2_PURE"):
    try:
        from . import _speedups as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
else:
    _impl = _fallback

legal_mask = _impl.legal_mask
flip_mask = _impl.flip_mask
popcount = _impl.popcount
StaticEvaluator = _impl.StaticEvaluator
BackupKernel = _impl.BackupKernel

MIN_KIND = _fallback.MIN_KIND
MAX_KIND = _fallback.MAX_KIND
