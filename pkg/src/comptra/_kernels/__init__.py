"""Kernel backend selection.

The compiled extension (Cython) is preferred when importable; otherwise the
pure-Python fallback is used. Set COMPTRA_PURE_PYTHON=1 to force the
fallback, e.g. for benchmarking or debugging.
"""

import os

if os.environ.get("COMPTRA_PURE_PYTHON") == "1":
    from . import _fallback as _impl
    BACKEND = "python"
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
        BACKEND = "c"
    except ImportError:
        from . import _fallback as _impl
        BACKEND = "python"

lcs_length_ids = _impl.lcs_length_ids
bm25_accumulate = _impl.bm25_accumulate

__all__ = ["BACKEND", "lcs_length_ids", "bm25_accumulate"]
