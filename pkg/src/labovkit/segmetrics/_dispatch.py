"""Kernel backend selection.

``LABOV_NUMBA`` controls which implementation of the hot kernels is
imported:

* unset or ``auto`` (default): numba when importable, else pure NumPy;
* ``1`` / ``numba``: require the JIT backend, raise if unavailable;
* ``0`` / ``numpy``: force the pure fallback.

Metric values are identical on both backends; only speed differs.
"""

from __future__ import annotations

import os

_FORCE_OFF = {"0", "false", "off", "numpy"}
_FORCE_ON = {"1", "true", "on", "numba"}

_flag = os.environ.get("LABOV_NUMBA", "auto").strip().lower()

if _flag in _FORCE_OFF:
    from ._kernels import boundary_match_tables

    KERNEL_BACKEND = "numpy"
elif _flag in _FORCE_ON:
    from ._kernels_numba import boundary_match_tables

    KERNEL_BACKEND = "numba"
else:
    try:
        from ._kernels_numba import boundary_match_tables

        KERNEL_BACKEND = "numba"
    except ImportError:
        from ._kernels import boundary_match_tables

        KERNEL_BACKEND = "numpy"

__all__ = ["boundary_match_tables", "KERNEL_BACKEND"]
