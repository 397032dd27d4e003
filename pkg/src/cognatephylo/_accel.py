"""Optional numba acceleration.

Hot kernels are decorated with :func:`jit`.  When numba is importable and
the environment variable ``COGNATEPHYLO_DISABLE_NUMBA`` is unset (or ``0``),
they are compiled with ``numba.njit``; otherwise the plain Python/numpy
function is used unchanged.  Kernels that have a dedicated vectorised numpy
variant pick between the two through :data:`USE_NUMBA`.
"""

import os

try:
    import numba
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("COGNATEPHYLO_DISABLE_NUMBA", "0") in ("", "0")


def jit(func):
    """Compile ``func`` with numba when enabled, else return it untouched."""
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


def py_func(func):
    """Return the uncompiled Python body of a (possibly jitted) kernel."""
    return getattr(func, "py_func", func)
