"""Optional numba acceleration.

Set ``CMCFOL_BACKEND=numpy`` to force the pure numpy code paths. The
default is ``numba`` whenever the package can be imported.
"""
from __future__ import annotations

import os

njit_kwargs = dict(cache=True, fastmath=False, nogil=True)

try:  # pragma: no cover - depends on environment
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def backend() -> str:
    """Return the active backend name, ``"numba"`` or ``"numpy"``."""
    want = os.environ.get("CMCFOL_BACKEND", "numba").strip().lower()
    if want not in ("numba", "numpy"):
        want = "numba"
    if want == "numba" and not HAVE_NUMBA:
        return "numpy"
    return want


def njit(func):
    """Compile ``func`` with numba when available, otherwise return it."""
    if HAVE_NUMBA:
        return numba.njit(**njit_kwargs)(func)
    return func
