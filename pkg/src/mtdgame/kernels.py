"""Select the compiled kernels when built, the numpy fallback otherwise.

Set ``MTDGAME_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if not os.environ.get("MTDGAME_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

trajectory_cost_sums = _impl.trajectory_cost_sums
simulate = _impl.simulate

__all__ = ["BACKEND", "trajectory_cost_sums", "simulate"]
