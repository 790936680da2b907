"""Backend selection for the hot numeric loops.

Kernels that dominate runtime (CTC forward/backward, Levenshtein DP,
brute-force path enumeration) ship in two flavours: an explicit-loop version
compiled with ``numba.njit`` and a vectorised pure-numpy version.  The
environment variable ``DOCREC_BACKEND`` picks one at import time:

* ``numba`` (default when numba imports cleanly)
* ``numpy`` (always available)

Both paths are kept numerically equivalent and are cross-checked in the test
suite; ``benchmarks/bench_backends.py`` compares their speed.
"""
from __future__ import annotations

import os

try:  # pragma: no cover - exercised implicitly
    import numba as _numba
except Exception:  # pragma: no cover
    _numba = None

HAVE_NUMBA = _numba is not None

_requested = os.environ.get("DOCREC_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ImportError(f"DOCREC_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

USE_NUMBA = HAVE_NUMBA and _requested != "numpy"


def njit(fn):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise.

    The identity fallback keeps the loop kernels importable (and testable,
    slowly) on machines without numba.
    """
    if HAVE_NUMBA:
        return _numba.njit(cache=True)(fn)
    return fn


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
