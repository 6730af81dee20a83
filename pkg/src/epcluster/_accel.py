"""Optional numba acceleration.

Hot kernels are decorated with :func:`njit`.  When numba is importable and
``EPCLUSTER_DISABLE_NUMBA`` is unset (or ``0``), they are compiled in
nopython mode with the GIL released; otherwise the plain Python/numpy
function is used unchanged.  The flag is read once, at import time.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FLAG = os.environ.get("EPCLUSTER_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED = _FLAG not in ("", "0", "false", "no")
USE_NUMBA = numba is not None and not NUMBA_DISABLED


def njit(func):
    """Compile ``func`` with numba if acceleration is active."""
    if not USE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def python_impl(func):
    """Return the uncompiled Python body of a kernel (itself if not jitted)."""
    return getattr(func, "py_func", func)
