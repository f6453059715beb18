"""Numba/numpy kernel selection.

Hot inner loops (conv2d, maxpool, the SMO sweep) exist in two variants: a
numba ``@njit`` build and a vectorized pure-numpy fallback.  The default is
numba when importable; setting the environment variable
``SPECTRAIN_DISABLE_NUMBA=1`` before import forces the numpy path (useful on
platforms without LLVM support and for A/B benchmarking; see
``benchmarks/bench_kernels.py``).
"""

import os

_DISABLE = os.environ.get("SPECTRAIN_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")

NUMBA_ENABLED = False
if not _DISABLE:
    try:
        from numba import njit, prange  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        pass

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):
        """No-op stand-in so kernel modules can decorate unconditionally."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap

    prange = range
