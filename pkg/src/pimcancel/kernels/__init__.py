"""Hot loops behind a backend switch.

The active backend is chosen once at import (see ``pimcancel._accel``);
``get_backend`` hands out either implementation explicitly for tests and
benchmarks.
"""
import importlib

from .._accel import BACKEND
from ._numpy import DivergenceError

__all__ = ["BACKEND", "DivergenceError", "get_backend", "data_matrix", "rls", "lms", "stream_cancel"]


def get_backend(name=None):
    name = name or BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    return importlib.import_module(f"{__name__}._{name}")


_active = get_backend()
data_matrix = _active.data_matrix
rls = _active.rls
lms = _active.lms
stream_cancel = _active.stream_cancel
