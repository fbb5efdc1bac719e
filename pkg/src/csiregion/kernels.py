"""Backend selection for the rate kernels.

The compiled extension is used when importable; set
``CSIREGION_BACKEND=python`` to force the pure-Python fallback.
"""
from __future__ import annotations

import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

python = _pykernels
compiled = None
if os.environ.get("CSIREGION_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as compiled
    except ImportError:  # pragma: no cover - depends on build
        log.info("compiled kernels unavailable, using pure-Python fallback")

backend = compiled if compiled is not None else python
BACKEND_NAME = "compiled" if compiled is not None else "python"

ul_rate = backend.ul_rate
dl_rate = backend.dl_rate
ul_optimize = backend.ul_optimize
dl_optimize = backend.dl_optimize
ul_optimize_batch = backend.ul_optimize_batch
dl_optimize_batch = backend.dl_optimize_batch
