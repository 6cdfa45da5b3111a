"""Geometry backend selection.

The compiled kernels are used when the extension was built; otherwise the
pure-Python module is loaded. Set ``MANET_DRI_PURE=1`` to force the fallback.
"""
import os

if os.environ.get("MANET_DRI_PURE"):
    from ._geometry_py import advance, neighbors, within

    BACKEND = "python"
else:
    try:
        from ._geometry import advance, neighbors, within

        BACKEND = "cython"
    except ImportError:
        from ._geometry_py import advance, neighbors, within

        BACKEND = "python"

__all__ = ["BACKEND", "advance", "neighbors", "within"]
