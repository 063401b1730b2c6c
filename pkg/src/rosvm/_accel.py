"""Backend switch for the compiled kernels.

The hot loops in :mod:`rosvm._kernels` are compiled with numba when it is
importable and ``ROSVM_DISABLE_JIT`` is unset (or ``0``). Otherwise callers
fall back to the pure-numpy paths. The choice can also be flipped at runtime
with :func:`set_backend`, which the tests and the benchmark use to run both.
"""

import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_DISABLED = os.environ.get("ROSVM_DISABLE_JIT", "0").strip().lower() not in ("", "0", "false", "no")

_backend = "numba" if (HAVE_NUMBA and not _DISABLED) else "numpy"


def get_backend():
    return _backend


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"``; returns the previous backend."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    prev, _backend = _backend, name
    return prev


def use_numba():
    return _backend == "numba"


if HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper
