"""Numba switch for the hot kernels.

Set ``MATCHDIST_DISABLE_NUMBA=1`` to run every kernel through its pure
numpy / Python fallback instead of the jitted path.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


def _disabled_by_env() -> bool:
    flag = os.environ.get("MATCHDIST_DISABLE_NUMBA", "").strip().lower()
    return flag not in ("", "0", "false", "no", "off")


USE_NUMBA = numba is not None and not _disabled_by_env()


def njit(func):
    """Compile ``func`` in nopython mode (cached, GIL released)."""
    if numba is None:  # pragma: no cover
        raise RuntimeError("numba is not installed")
    return numba.njit(cache=True, nogil=True)(func)


def select(numba_impl, fallback_impl):
    """Return the jitted kernel when acceleration is on, else the fallback."""
    if USE_NUMBA:
        return njit(numba_impl)
    return fallback_impl
