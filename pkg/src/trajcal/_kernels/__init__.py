"""Hot-loop kernels with a compiled backend and a numpy/scipy fallback.

The compiled extension is preferred when importable. Set
``TRAJCAL_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

IMPLEMENTATIONS = {"python": _pykernels}
if _ckernels is not None:
    IMPLEMENTATIONS["cython"] = _ckernels

if _ckernels is not None and not os.environ.get("TRAJCAL_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = IMPLEMENTATIONS[BACKEND]
associate_nearest = _impl.associate_nearest
local_maxima = _impl.local_maxima
resample_poses = _impl.resample_poses

__all__ = ["BACKEND", "IMPLEMENTATIONS", "associate_nearest", "local_maxima", "resample_poses"]
