"""Pick the compiled row kernels when available, else the Python ones.

Set ``DEPSESS_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernel_py

_ext = None
if not os.environ.get("DEPSESS_PURE_PYTHON"):
    try:
        from . import _kernel as _ext  # type: ignore[no-redef]
    except ImportError:
        _ext = None

BACKEND = "cython" if _ext is not None else "python"


if _ext is not None:

    def tighten(rows):
        try:
            return _ext.tighten(rows)
        except OverflowError:
            return _kernel_py.tighten(rows)

    def shadow(rows, k, dark):
        try:
            return _ext.shadow(rows, k, dark)
        except OverflowError:
            return _kernel_py.shadow(rows, k, dark)

else:
    tighten = _kernel_py.tighten
    shadow = _kernel_py.shadow
