"""Optional JIT acceleration for the hot assembly kernels.

The kernels in :mod:`wmlab._kernels` are written once in plain
numpy-on-scalars style and decorated with :func:`njit` from this module.
When numba is importable and the environment variable ``WMLAB_NO_NUMBA``
is unset (or set to a falsy value such as ``0``), the decorator is
``numba.njit``; otherwise it is a pass-through and the identical source
runs as ordinary Python. Either way the undecorated function remains
reachable as ``fn.py_func`` so benchmarks can time both paths.

Dense linear algebra (eigensolves, Cholesky, matmul) is never jitted;
it already runs in LAPACK/BLAS.
"""

import os


def _env_truthy(value):
    return str(value).strip().lower() in {"1", "true", "yes", "on"}


NUMBA_DISABLED = _env_truthy(os.environ.get("WMLAB_NO_NUMBA", ""))

if not NUMBA_DISABLED:
    try:
        from numba import njit as _numba_njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is an install requirement
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False


def njit(func=None, **options):
    """``numba.njit`` when enabled, else a pass-through decorator.

    The pass-through attaches ``py_func`` pointing at the function itself
    so callers can always reach the pure-Python implementation.
    """

    options.setdefault("cache", True)

    def wrap(fn):
        if HAVE_NUMBA:
            return _numba_njit(**options)(fn)
        fn.py_func = fn
        return fn

    if func is not None:
        return wrap(func)
    return wrap
