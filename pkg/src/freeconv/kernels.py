"""Backend selection for the power-sum kernels.

The compiled module is used when it imports; setting ``FREECONV_PURE_PYTHON=1``
forces the numpy fallback.
"""
import os

if os.environ.get("FREECONV_PURE_PYTHON"):
    from ._kernels_py import BACKEND, powersum_continue, powersum_eval, powersum_solve
else:
    try:
        from ._kernels import BACKEND, powersum_continue, powersum_eval, powersum_solve
    except ImportError:  # extension not built
        from ._kernels_py import BACKEND, powersum_continue, powersum_eval, powersum_solve

__all__ = ["BACKEND", "powersum_continue", "powersum_eval", "powersum_solve"]
