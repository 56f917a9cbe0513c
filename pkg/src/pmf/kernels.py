"""Backend selection for the hot kernels.

The compiled extension is preferred; set ``PMF_PURE_PYTHON=1`` to force the
numpy fallback (the benchmark script and the backend-agreement tests do).
"""

import os

from . import _pykernels

python_backend = _pykernels

if os.environ.get("PMF_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    compiled_backend = None
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels
    compiled_backend = _impl if _impl is not _pykernels else None

BACKEND = _impl.BACKEND
eval_base = _impl.eval_base
transformed_batch = _impl.transformed_batch
mean_pairwise_distance = _impl.mean_pairwise_distance

__all__ = [
    "BACKEND",
    "compiled_backend",
    "eval_base",
    "mean_pairwise_distance",
    "python_backend",
    "transformed_batch",
]
