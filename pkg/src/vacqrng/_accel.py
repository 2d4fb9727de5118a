"""Kernel backend selection.

Hot inner loops are compiled with numba when it is available. Every kernel
has a vectorized pure-numpy fallback; set ``VACQRNG_BACKEND=numpy`` to force
the fallbacks (the benchmark harness does this to compare the two paths),
or ``VACQRNG_BACKEND=numba`` to make a missing numba a hard error instead
of a silent downgrade. The default ``auto`` uses numba if it imports.
"""

import os

_choice = os.environ.get("VACQRNG_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"VACQRNG_BACKEND must be one of auto/numba/numpy, got {_choice!r}"
    )

if _choice == "numpy":
    NUMBA_ENABLED = False
    njit = None
else:
    try:
        from numba import njit  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        if _choice == "numba":
            raise
        NUMBA_ENABLED = False
        njit = None


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
