"""Backend switch for the hot kernels.

Set ``HPCMD_DISABLE_NUMBA=1`` to force the pure-numpy path. Numba is used
whenever it is importable and not disabled.
"""
import os

_FALSY = {"", "0", "false", "no", "off"}

NUMBA_DISABLED = os.environ.get("HPCMD_DISABLE_NUMBA", "").strip().lower() not in _FALSY

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

USE_NUMBA = numba is not None and not NUMBA_DISABLED

# fastmath stays off: results must be reproducible run to run
NJIT_OPTIONS = dict(cache=True, nogil=True, fastmath=False, error_model="numpy")


def njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged."""
    if numba is None:
        return fn
    return numba.njit(**NJIT_OPTIONS)(fn)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
