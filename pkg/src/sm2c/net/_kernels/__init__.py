"""Kernel backend selection.

The compiled extension is preferred when importable; set SM2C_KERNELS to
"numpy" or "compiled" to force one (forcing "compiled" raises if the build
is missing). Both backends implement conv2d / conv2d_backward with identical
contracts; see benchmarks/bench_kernels.py for a speed comparison.
"""

import os

_requested = os.environ.get("SM2C_KERNELS", "auto").lower()

if _requested not in ("auto", "numpy", "compiled"):
    raise RuntimeError(f"SM2C_KERNELS must be auto|numpy|compiled, got {_requested!r}")

if _requested in ("auto", "compiled"):
    try:
        from ._conv_cy import BACKEND, conv2d, conv2d_backward
    except ImportError:
        if _requested == "compiled":
            raise
        from .conv_numpy import BACKEND, conv2d, conv2d_backward
else:
    from .conv_numpy import BACKEND, conv2d, conv2d_backward

__all__ = ["BACKEND", "conv2d", "conv2d_backward"]
