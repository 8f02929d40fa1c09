"""Kernel backend selection.

HULLSCOPE_BACKEND picks the hot-kernel implementation at import time:
  numba  - require the numba-compiled kernels (error if numba missing)
  numpy  - force the pure-numpy fallback
  auto   - numba when importable, numpy otherwise (default)

HULLSCOPE_THREADS caps batch-loop parallelism (0 or unset = auto).
"""

import os

_ENV_BACKEND = "HULLSCOPE_BACKEND"
_ENV_THREADS = "HULLSCOPE_THREADS"


def _load():
    choice = os.environ.get(_ENV_BACKEND, "auto").strip().lower() or "auto"
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"{_ENV_BACKEND} must be 'numba', 'numpy' or 'auto', got {choice!r}"
        )
    if choice == "numpy":
        from . import _kernels_numpy as kern
        return kern
    if choice == "numba":
        from . import _kernels_numba as kern
        return kern
    try:
        from . import _kernels_numba as kern
    except ImportError:
        from . import _kernels_numpy as kern
    return kern


_kern = _load()
BACKEND = _kern.BACKEND
fw_project = _kern.fw_project
monomial_design = _kern.monomial_design


def thread_count():
    """Effective worker count for embarrassingly parallel batch loops."""
    raw = os.environ.get(_ENV_THREADS, "0").strip() or "0"
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{_ENV_THREADS} must be an integer, got {raw!r}")
    if cap < 0:
        raise ValueError(f"{_ENV_THREADS} must be >= 0, got {cap}")
    if cap == 0:
        return min(os.cpu_count() or 1, 8)
    return cap
