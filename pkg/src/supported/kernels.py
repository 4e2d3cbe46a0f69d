"""Search kernels: compiled extension when built, pure Python otherwise.

Set SUPPORTED_PURE_PYTHON=1 to force the Python versions.
"""

import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("SUPPORTED_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _compiled
        BACKEND = "compiled"
    except ImportError:
        _compiled = None
else:
    _compiled = None


def min_cover(closed_nbr, clients, limit):
    if _compiled is not None and len(closed_nbr) <= 64:
        return _compiled.min_cover(closed_nbr, clients, limit)
    return _kernels_py.min_cover(closed_nbr, clients, limit)


def find_repetition(adj, colors, max_half, sources=None):
    if _compiled is not None:
        return _compiled.find_repetition(adj, colors, max_half, sources)
    return _kernels_py.find_repetition(adj, colors, max_half, sources)
