"""Hot-kernel backend selection.

The compiled Cython core is used when its extension module imported cleanly;
otherwise the pure-numpy fallback takes over. Set FAIRDEP_KERNELS=numpy or
FAIRDEP_KERNELS=cython to force a backend (forcing cython raises if the
extension is missing). Both backends implement the same contract; results
may differ in the last floating-point ulp, so determinism guarantees hold
per backend.
"""

from __future__ import annotations

import os

from ._pykernels import sigmoid  # loss assembly always uses the numpy sigmoid

_requested = os.environ.get("FAIRDEP_KERNELS", "auto").strip().lower() or "auto"
if _requested not in ("auto", "cython", "numpy"):
    raise ValueError(
        f"FAIRDEP_KERNELS must be 'cython', 'numpy' or unset, got {_requested!r}"
    )

if _requested in ("auto", "cython"):
    try:
        from . import _cykernels as _impl

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from . import _pykernels as _impl

        BACKEND = "numpy"
else:
    from . import _pykernels as _impl

    BACKEND = "numpy"

logistic_forward = _impl.logistic_forward
logistic_backward = _impl.logistic_backward
mlp_forward = _impl.mlp_forward
mlp_backward = _impl.mlp_backward
adam_step = _impl.adam_step

__all__ = [
    "BACKEND",
    "adam_step",
    "logistic_backward",
    "logistic_forward",
    "mlp_backward",
    "mlp_forward",
    "sigmoid",
]
