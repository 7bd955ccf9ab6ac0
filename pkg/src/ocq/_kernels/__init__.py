"""Kernel backend selection.

OCPQ_BACKEND=numpy forces the pure-numpy path; OCPQ_BACKEND=numba (or unset)
uses the compiled kernels when numba imports, falling back to numpy with a
logged warning otherwise.
"""

from __future__ import annotations

import logging
import os

_log = logging.getLogger("ocq")
_requested = os.environ.get("OCPQ_BACKEND", "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise ValueError(f"OCPQ_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numpy":
    from . import numpy_impl as _impl
else:
    try:
        from . import numba_impl as _impl
    except ImportError:
        if _requested == "numba":
            _log.warning("numba requested via OCPQ_BACKEND but not importable; using numpy")
        from . import numpy_impl as _impl

BACKEND_NAME = _impl.BACKEND_NAME
expand_adjacency = _impl.expand_adjacency
pairs_in_table = _impl.pairs_in_table
group_count = _impl.group_count
group_duration_stats = _impl.group_duration_stats
