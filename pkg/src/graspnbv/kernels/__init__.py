"""Hot-kernel dispatch: compiled extension if available, numpy fallback otherwise.

Set GRASPNBV_PURE_PYTHON=1 to force the fallback (used by the benchmark and
the kernel-equivalence tests).
"""

import os

from . import _py

if os.environ.get("GRASPNBV_PURE_PYTHON"):
    _impl = _py
    IMPLEMENTATION = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        IMPLEMENTATION = "compiled"
    except ImportError:
        _impl = _py
        IMPLEMENTATION = "python"

insert_rays = _impl.insert_rays
first_nonfree_mask = _impl.first_nonfree_mask

__all__ = ["insert_rays", "first_nonfree_mask", "IMPLEMENTATION"]
