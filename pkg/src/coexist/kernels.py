"""Backend selection for the numerical hot loops.

The compiled extension ``coexist._ckernels`` is used when it was built;
otherwise, or when ``COEXIST_PURE_PYTHON=1`` is set, the pure-Python
module ``coexist._pykernels`` is used. Both expose the same functions.
"""

from __future__ import annotations

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("COEXIST_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend  # type: ignore[no-redef]
    except ImportError:  # extension not built
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend

BACKEND = "cython" if compiled_backend is not None else "python"

fbl_rate = _active.fbl_rate
min_power = _active.min_power
stable_matchings = _active.stable_matchings
best_assignment = _active.best_assignment

__all__ = [
    "BACKEND",
    "best_assignment",
    "compiled_backend",
    "fbl_rate",
    "min_power",
    "python_backend",
    "stable_matchings",
]
