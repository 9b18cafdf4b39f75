"""Kernel backend selection.

The hot loops (Cauchy products, coefficient recurrences, residual stacks,
and the coefficient-ODE right-hand sides) exist twice: a compiled Cython
extension and a pure-numpy fallback with identical semantics.  The
compiled module is preferred when importable; set ``PQLOCAL_PURE_PYTHON=1``
to force the fallback.
"""

import os

from . import _kernels_py

_FUNCTIONS = (
    "conv_stacks",
    "lower_recurrence",
    "lower_recurrence_dir",
    "residual_f",
    "residual_f_dir",
    "c_rhs_irregular",
    "c_rhs_regular",
    "residual_log_stack",
)

if os.environ.get("PQLOCAL_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _coeffcore as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def get_backend(name):
    """Return a kernel module by name ('python' or 'compiled')."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _coeffcore

        return _coeffcore
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    names = ["python"]
    try:
        get_backend("compiled")
        names.append("compiled")
    except ImportError:
        pass
    return names


conv_stacks = _impl.conv_stacks
lower_recurrence = _impl.lower_recurrence
lower_recurrence_dir = _impl.lower_recurrence_dir
residual_f = _impl.residual_f
residual_f_dir = _impl.residual_f_dir
c_rhs_irregular = _impl.c_rhs_irregular
c_rhs_regular = _impl.c_rhs_regular
residual_log_stack = _impl.residual_log_stack
