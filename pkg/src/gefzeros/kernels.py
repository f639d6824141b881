"""Kernel selection: the compiled ``_core`` extension when importable,
otherwise the numpy implementations in ``_pure``.

Set ``GEFZEROS_PURE=1`` in the environment to force the fallback.
"""

import os

from . import _pure

BACKEND = "pure"
_impl = _pure

if os.environ.get("GEFZEROS_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pure

series_eval = _impl.series_eval
refine_segments = _impl.refine_segments
aberth = _impl.aberth

OK = _pure.OK
ZERO_ON_CONTOUR = _pure.ZERO_ON_CONTOUR
DEPTH_EXCEEDED = _pure.DEPTH_EXCEEDED


def get_backend(name):
    """Module implementing the kernels for ``name`` in {"pure", "cython"}."""
    if name == "pure":
        return _pure
    if name == "cython":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")
