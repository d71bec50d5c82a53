"""Max-flow backend selection.

The compiled kernel is used when it was built and ``KDMATCH_PURE_PYTHON``
is unset; otherwise the pure-Python implementation takes over.  Both
expose ``max_flow(n, tails, heads, caps, source, sink) -> (value, flows)``.
"""

from __future__ import annotations

import os

from . import _flow_py

BACKEND = "python"
max_flow = _flow_py.max_flow

if not os.environ.get("KDMATCH_PURE_PYTHON"):
    try:
        from . import _flow_ext
    except ImportError:
        pass
    else:
        max_flow = _flow_ext.max_flow
        BACKEND = "cython"


def backends() -> dict:
    """All importable implementations by name (for tests and benchmarks)."""
    out = {"python": _flow_py.max_flow}
    try:
        from . import _flow_ext
    except ImportError:
        return out
    out["cython"] = _flow_ext.max_flow
    return out
