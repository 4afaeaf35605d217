"""Kernel backend selection.

Hot loops are written once in a numba-compatible subset of Python. When numba
is importable and ``TRANSDUCE_SIM_BACKEND`` is not ``numpy`` they are compiled
with ``njit``; otherwise the same functions run as plain Python and the
vectorised numpy paths in :mod:`transduce_sim.kernels` are used instead.
"""

from __future__ import annotations

import os
import warnings

BACKEND_ENV = "TRANSDUCE_SIM_BACKEND"
THREADS_ENV = "TRANSDUCE_SIM_THREADS"

try:  # pragma: no cover - exercised implicitly
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None


def _requested_backend() -> str:
    value = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if value not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {value!r}")
    return value


USE_NUMBA = _numba is not None and _requested_backend() == "numba"

if USE_NUMBA:
    # numba falls back to another threading layer on its own; the notice is noise
    warnings.filterwarnings("ignore", message="The TBB threading layer", category=_numba.NumbaWarning)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


# fastmath stays off: compensated sums rely on strict IEEE ordering.
if USE_NUMBA:
    njit = _numba.njit(cache=True, fastmath=False)
    njit_parallel = _numba.njit(cache=True, fastmath=False, parallel=True)
    prange = _numba.prange
else:
    def njit(fn):
        return fn

    njit_parallel = njit
    prange = range


def set_threads(n: int | None = None) -> int:
    """Set the kernel thread count; ``None`` reads ``TRANSDUCE_SIM_THREADS``."""
    if n is None:
        env = os.environ.get(THREADS_ENV)
        if not env:
            return get_threads()
        n = int(env)
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if USE_NUMBA:
        n = min(n, _numba.config.NUMBA_NUM_THREADS)
        _numba.set_num_threads(n)
    return n


def get_threads() -> int:
    if USE_NUMBA:
        return _numba.get_num_threads()
    return 1
