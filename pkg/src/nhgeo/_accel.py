"""Numba switch.

Kernels are plain Python functions decorated with :func:`jit`.  When numba is
importable and ``NHGEO_DISABLE_NUMBA`` is unset (or ``0``), they are compiled
with ``numba.njit``; otherwise the decorator is the identity and the same
source runs as ordinary Python.
"""
import os

_FLAG = os.environ.get("NHGEO_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and not DISABLED_BY_ENV


def jit(func=None, *, cache=True):
    """Compile ``func`` in nopython/nogil mode when numba is enabled."""

    def wrap(f):
        if not USE_NUMBA:
            return f
        return numba.njit(cache=cache, nogil=True)(f)

    if func is None:
        return wrap
    return wrap(func)


def python_version(kernel):
    """Return the uncompiled Python function behind ``kernel``."""
    return getattr(kernel, "py_func", kernel)
