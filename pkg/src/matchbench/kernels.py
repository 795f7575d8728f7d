"""Hot-loop kernel selection.

The compiled :mod:`matchbench._kernels` extension is used when it imports;
otherwise the numpy implementation in :mod:`matchbench._pfaffian_py` is used.
Setting ``MATCHBENCH_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pfaffian_py

BACKEND = "python"
_impl = _pfaffian_py

if os.environ.get("MATCHBENCH_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on build
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

pfaffian_ltl = _impl.pfaffian_ltl
pfaffian_batch = _impl.pfaffian_batch


def implementations():
    """Return ``{name: module}`` for every kernel implementation importable here."""
    out = {"python": _pfaffian_py}
    try:
        from . import _kernels
    except ImportError:  # pragma: no cover
        pass
    else:
        out["cython"] = _kernels
    return out
