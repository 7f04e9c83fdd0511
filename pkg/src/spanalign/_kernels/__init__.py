"""Hot-kernel backend selection.

The compiled extension is preferred; the pure-Python fallback is used
when the extension is missing or when ``SPANALIGN_PURE_PYTHON=1`` is
set. Both backends implement the same functions with identical results
(tie handling included), so callers never need to know which one is
active beyond reporting ``BACKEND``.
"""

import os

if os.environ.get("SPANALIGN_PURE_PYTHON") == "1":
    from spanalign._kernels import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from spanalign._kernels import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "c"
    except ImportError:
        from spanalign._kernels import _pykernels as _impl

        BACKEND = "python"

best_span_kernel = _impl.best_span_kernel
top_k_spans_kernel = _impl.top_k_spans_kernel
dp_solve_kernel = _impl.dp_solve_kernel

# Bead shapes (src count, tgt count) in DP tie-preference order; the
# penalty vector passed to dp_solve_kernel follows this order.
BEAD_ORDER = ((1, 1), (0, 1), (1, 0), (1, 2), (2, 1), (2, 2))

__all__ = [
    "BACKEND",
    "BEAD_ORDER",
    "best_span_kernel",
    "top_k_spans_kernel",
    "dp_solve_kernel",
]
