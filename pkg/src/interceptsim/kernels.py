"""Kernel backend selection.

The compiled Cython extension is preferred when available; the numpy
fallback implements the identical contract. Override with the
INTERCEPTSIM_KERNELS environment variable ("cython" | "numpy" | "auto").
"""

import os

_requested = os.environ.get("INTERCEPTSIM_KERNELS", "auto").lower()

if _requested not in ("auto", "cython", "numpy"):
    raise ValueError(f"INTERCEPTSIM_KERNELS must be auto|cython|numpy, got {_requested!r}")

if _requested in ("auto", "cython"):
    try:
        from . import _kernels_cy as _impl
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from . import _kernels_py as _impl
        BACKEND = "numpy"
else:
    from . import _kernels_py as _impl
    BACKEND = "numpy"

propagate_states = _impl.propagate_states
