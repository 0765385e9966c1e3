"""Kernel backend selection: compiled extension if available, numpy fallback
otherwise.  Set GREEDYPROC_PURE=1 to force the fallback (used by the kernel
equivalence tests and the benchmark)."""
import os

import numpy as np

if os.environ.get("GREEDYPROC_PURE") == "1":
    from . import _fallback as _impl
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl
        BACKEND = "compiled"
    except ImportError:
        from . import _fallback as _impl
        BACKEND = "python"


def _i32(a):
    return np.ascontiguousarray(a, dtype=np.int32)


def accept_batch(tbits, us, vs):
    return _impl.accept_batch(tbits, _i32(us), _i32(vs))


def mark_closed(obits, ebits, us, vs):
    return _impl.mark_closed(obits, ebits, _i32(us), _i32(vs))


def first_triangle(tbits, us, vs):
    return _impl.first_triangle(tbits, _i32(us), _i32(vs))


def count_between(tbits, rows, colmask):
    return _impl.count_between(tbits, _i32(rows), colmask)
