"""Kernel backend selection.

The compiled extension is used when it imports cleanly; setting
``NOREGRET_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

if os.environ.get("NOREGRET_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "compiled"
    except ImportError:
        from . import _pykernels as kernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
