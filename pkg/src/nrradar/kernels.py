"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
versions are used. Set ``NRRADAR_PURE=1`` to force the fallback.
"""

import os

from . import _kernels_py

try:
    if os.environ.get("NRRADAR_PURE"):
        raise ImportError("pure backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py

gold_batch = _impl.gold_batch
sweep_power = _impl.sweep_power
