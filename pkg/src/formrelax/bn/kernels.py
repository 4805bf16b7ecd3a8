"""Selects the counting-kernel backend at import time.

The compiled extension is preferred; the numpy implementation is the
fallback.  Set FORMRELAX_PURE_PYTHON=1 to force the fallback (used by the
benchmark and by CI to exercise both paths).
"""

from __future__ import annotations

import os

if os.environ.get("FORMRELAX_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

contingency = _impl.contingency
loglik = _impl.loglik
BACKEND = _impl.BACKEND
