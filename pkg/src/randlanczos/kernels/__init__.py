"""Kernel backend selection.

The hot kernels live in ``_core`` as plain numpy functions.  By default
they are compiled with ``numba.njit``; set ``RANDLANCZOS_NO_NUMBA=1`` in
the environment (or run without numba installed) to use the pure-numpy
fallback.  ``BACKEND`` reports which path is active.  The benchmark in
``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import _core

__all__ = [
    "BACKEND",
    "tridiag_ql",
    "stieltjes_fill",
    "lanczos_dense_fill",
    "lanczos_diag_fill",
    "witness_count",
    "witness_coord_scan",
]

_KERNEL_NAMES = [
    "tridiag_ql",
    "stieltjes_fill",
    "lanczos_dense_fill",
    "lanczos_diag_fill",
    "witness_count",
    "witness_coord_scan",
]


def _numba_enabled() -> bool:
    if os.environ.get("RANDLANCZOS_NO_NUMBA", "").strip() not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


if _numba_enabled():
    from numba import njit

    BACKEND = "numba"
    for _name in _KERNEL_NAMES:
        globals()[_name] = njit(cache=True)(getattr(_core, _name))
else:
    BACKEND = "numpy"
    for _name in _KERNEL_NAMES:
        globals()[_name] = getattr(_core, _name)
