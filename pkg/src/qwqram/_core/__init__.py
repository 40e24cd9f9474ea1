"""Kernel backend selection.

The compiled extension is used when it was built and ``QWQRAM_PURE_PYTHON``
is unset; otherwise the numpy implementation is loaded.
"""

import os

from . import _pykernels as pykernels

if os.environ.get("QWQRAM_PURE_PYTHON", "") not in ("", "0"):
    kernels = pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = pykernels
        BACKEND = "python"

OK = pykernels.OK
ERR_PHASE = pykernels.ERR_PHASE
ERR_DEPTH = pykernels.ERR_DEPTH
ERR_BLUE_INPUT = pykernels.ERR_BLUE_INPUT
ERR_MULTI_SWITCH = pykernels.ERR_MULTI_SWITCH

__all__ = ["kernels", "pykernels", "BACKEND"]
