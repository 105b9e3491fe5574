"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

FISHER_PINN_BACKEND=numba (the default when numba is importable)
compiles the per-element jet algebra and the FDM sweep with @njit;
=numpy runs vectorized implementations of the same operations.  Matrix
products and tanh always go through numpy (BLAS / SIMD libm).  The two
backends agree to floating-point roundoff, and fixed-seed runs are
byte-reproducible within one backend.
"""

import functools
import os

from . import backend_numpy, mlp

_requested = os.environ.get("FISHER_PINN_BACKEND", "").strip().lower()
if _requested not in ("", "numpy", "numba"):
    raise ValueError(
        f"FISHER_PINN_BACKEND must be 'numpy' or 'numba', got {_requested!r}")

if _requested in ("", "numba"):
    try:
        from . import backend_numba as _ops
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        _ops = backend_numpy
        BACKEND = "numpy"
else:
    _ops = backend_numpy
    BACKEND = "numpy"

mlp_value_forward = functools.partial(mlp.mlp_value_forward, _ops)
mlp_value_backward = functools.partial(mlp.mlp_value_backward, _ops)
mlp_jet_forward = functools.partial(mlp.mlp_jet_forward, _ops)
mlp_jet_backward = functools.partial(mlp.mlp_jet_backward, _ops)
fdm_solve_kernel = _ops.fdm_solve_kernel
fdm_final_row_kernel = _ops.fdm_final_row_kernel
