"""Backend selection for the hot stencil kernels.

The environment variable HELIMAG_BACKEND picks the implementation:

    auto   (default) numba if importable, else pure numpy
    numba  require the numba JIT kernels
    numpy  force the vectorized numpy fallback

Both backends expose the same functions; `benchmarks/bench_kernels.py`
compares them.
"""

from __future__ import annotations

import os

_requested = os.environ.get("HELIMAG_BACKEND", "auto").lower()

if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"HELIMAG_BACKEND={_requested!r} not recognized (use auto|numba|numpy)"
    )

if _requested == "numpy":
    from . import numpy_backend as _impl
else:
    try:
        from . import numba_backend as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "numba":
            raise
        from . import numpy_backend as _impl  # type: ignore[no-redef]

BACKEND_NAME = _impl.BACKEND_NAME
diff_chiral = _impl.diff_chiral
diff_chiral_t = _impl.diff_chiral_t
diff_onesided = _impl.diff_onesided
second_diff = _impl.second_diff
cross_e = _impl.cross_e
helical_partial = _impl.helical_partial
helical_laplacian = _impl.helical_laplacian


def backend_name() -> str:
    return BACKEND_NAME
