"""Acceleration backend selection.

Hot loops are compiled with numba when it is importable and the environment
variable RANDINV_NO_NUMBA is unset.  With RANDINV_NO_NUMBA=1 (or when numba
is missing) every kernel falls back to a pure numpy/Python implementation,
so results never depend on which backend ran.
"""

import functools
import os


def _flag_disabled() -> bool:
    val = os.environ.get("RANDINV_NO_NUMBA", "")
    return val.strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = False

if not _flag_disabled():
    try:
        from numba import njit as _numba_njit

        USE_NUMBA = True
    except ImportError:
        USE_NUMBA = False


if USE_NUMBA:
    njit = _numba_njit
else:

    def njit(*args, **kwargs):
        """Identity decorator standing in for numba.njit."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            @functools.wraps(func)
            def inner(*a, **kw):
                return func(*a, **kw)

            return inner

        return wrap


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
