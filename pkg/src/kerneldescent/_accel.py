"""Backend selection for the compiled numeric kernels.

The hot loops (statevector gate application, surrogate value/gradient,
inner descent steps) exist in two interchangeable implementations:
numba-compiled scalar loops and vectorized numpy. The numba path is the
default whenever numba imports; set KERNELDESCENT_NUMBA=0 to force the
numpy fallback, e.g. for debugging or benchmarking.
"""

import os

_flag = os.environ.get("KERNELDESCENT_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _flag not in {"0", "false", "no", "off"}

if NUMBA_REQUESTED:
    try:
        import numba  # noqa: F401

        NUMBA_AVAILABLE = True
    except ImportError:
        NUMBA_AVAILABLE = False
else:
    NUMBA_AVAILABLE = False

BACKEND = "numba" if NUMBA_AVAILABLE else "numpy"
