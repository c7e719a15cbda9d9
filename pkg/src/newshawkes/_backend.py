"""Selects the compiled core when available, else the pure-Python fallback."""
import os

if os.environ.get("NEWSHAWKES_PURE_PYTHON"):
    from . import _pycore as core
    BACKEND = "python"
else:
    try:
        from . import _core as core
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _pycore as core
        BACKEND = "python"

__all__ = ["core", "BACKEND"]
