"""Backend selection for the hot loops.

Set ``PIMCANCEL_DISABLE_NUMBA=1`` before import to force the pure-numpy
kernels even when numba is installed.
"""
import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and not _flag("PIMCANCEL_DISABLE_NUMBA")
BACKEND = "numba" if USE_NUMBA else "numpy"
