"""Optional numba acceleration for the dense inner kernels.

The package runs on two interchangeable backends:

* numba ``@njit`` compilation of the kernels in :mod:`ddsolve.kernels`
  (default whenever numba imports cleanly), and
* the identical functions executed as plain numpy code.

Set the environment variable ``DDSOLVE_DISABLE_JIT=1`` before import to force
the pure-numpy path; it is also selected automatically when numba is missing.
Both paths share one source, so results differ only in speed.
"""

from __future__ import annotations

import os

DISABLE_ENV = "DDSOLVE_DISABLE_JIT"

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via DDSOLVE_DISABLE_JIT
    numba = None
    HAS_NUMBA = False


def _jit_disabled_by_env() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() in ("1", "true", "yes")


JIT_ENABLED = HAS_NUMBA and not _jit_disabled_by_env()


def maybe_jit(fn):
    """Compile ``fn`` with numba when the jit backend is active, else return it."""
    if JIT_ENABLED:
        return numba.njit(fn, cache=True, fastmath=False)
    return fn
