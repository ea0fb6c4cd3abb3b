"""Kernel backend selection.

``MPIFORGE_BACKEND`` picks the implementation of the hot kernels:

* ``numba`` (default): JIT-compiled loops from ``_kernels_numba``. Falls
  back to numpy with a warning if numba cannot be imported.
* ``numpy``: pure-numpy reference path.

``MPIFORGE_THREADS`` caps the numba worker pool (0 or unset = automatic).
Both backends produce results equal to sequential evaluation; the numpy
path ignores the thread cap.
"""

import os
import warnings

import numpy as np

from . import _kernels_numpy

_VALID = ("numba", "numpy")


def _select():
    requested = os.environ.get("MPIFORGE_BACKEND", "numba").strip().lower()
    if requested not in _VALID:
        raise ValueError(
            f"MPIFORGE_BACKEND={requested!r} not understood; expected one of {_VALID}"
        )
    if requested == "numpy":
        return "numpy", _kernels_numpy
    try:
        from . import _kernels_numba
    except ImportError as exc:
        warnings.warn(f"numba backend unavailable ({exc}); using numpy fallback")
        return "numpy", _kernels_numpy
    _apply_thread_cap()
    return "numba", _kernels_numba


def _apply_thread_cap():
    raw = os.environ.get("MPIFORGE_THREADS", "0").strip()
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"MPIFORGE_THREADS={raw!r} is not an integer")
    if cap <= 0:
        return
    import numba

    numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))


_NAME, _IMPL = _select()


def active_backend() -> str:
    """Name of the kernel implementation in use ('numba' or 'numpy')."""
    return _NAME


def warp_bilinear(src: np.ndarray, hinv: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    src = np.ascontiguousarray(src, dtype=np.float32)
    hinv = np.ascontiguousarray(hinv, dtype=np.float64)
    return _IMPL.warp_bilinear(src, hinv, int(out_h), int(out_w))


def suffix_transmittance(alpha: np.ndarray) -> np.ndarray:
    alpha = np.ascontiguousarray(alpha, dtype=np.float32)
    return _IMPL.suffix_transmittance(alpha)


def composite_over_values(values: np.ndarray) -> np.ndarray:
    values = np.ascontiguousarray(values, dtype=np.float32)
    return _IMPL.composite_over_values(values)
