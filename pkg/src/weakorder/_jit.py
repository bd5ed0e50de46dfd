"""Optional numba acceleration.

Set ``WEAKORDER_NO_JIT=1`` to run every kernel as plain Python over numpy
arrays. The compiled and interpreted paths execute the same source, so the
fallback is also what the benchmark compares against.
"""

import os

__all__ = ["njit", "JIT_ENABLED", "py_func"]

_disabled = os.environ.get("WEAKORDER_NO_JIT", "").strip() not in ("", "0")

try:
    if _disabled:
        raise ImportError
    from numba import njit as _numba_njit
except ImportError:
    _numba_njit = None


def _identity(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


JIT_ENABLED = _numba_njit is not None

if JIT_ENABLED:
    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        if len(args) == 1 and callable(args[0]):
            return _numba_njit(**kwargs)(args[0])
        return _numba_njit(*args, **kwargs)
else:
    njit = _identity


def py_func(f):
    """Return the uncompiled Python body of a kernel."""
    return getattr(f, "py_func", f)
