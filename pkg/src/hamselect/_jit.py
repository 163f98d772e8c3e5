"""Backend switch for the compiled kernels.

Set ``HAMSELECT_BACKEND=numpy`` to run the pure-numpy fallbacks even when
numba is importable. Any other value (or unset) uses numba when available.
"""

import os

try:
    import numba as nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None
    HAVE_NUMBA = False

BACKEND = os.environ.get("HAMSELECT_BACKEND", "numba").strip().lower()
USE_NUMBA = HAVE_NUMBA and BACKEND != "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, identity decorator otherwise."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return nb.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
