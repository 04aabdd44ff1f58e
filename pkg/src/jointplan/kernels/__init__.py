"""Tape evaluation kernels.

The compiled extension is used when it was built; otherwise the numpy
reference implementation. Set ``JOINTPLAN_PURE_PYTHON=1`` to force the
fallback.
"""
import os

from . import _reference

if os.environ.get("JOINTPLAN_PURE_PYTHON", "") not in ("", "0"):
    _impl = _reference
    BACKEND = "python"
else:
    try:
        from . import _compiled as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _reference
        BACKEND = "python"

HW_EXP = _reference.HW_EXP
hw_value = _impl.hw_value
hw_deriv = _impl.hw_deriv
hw_second = _impl.hw_second


def residuals(tape, x, delta=0.0, impl=None):
    k = impl or _impl
    return k.residuals(
        x, tape.m, tape.const, tape.lin_row, tape.lin_col, tape.lin_coef, tape.bil_row,
        tape.bil_i, tape.bil_j, tape.bil_coef, tape.hw_row, tape.hw_col, tape.hw_coef, float(delta),
    )


def jac_contrib(tape, x, delta=0.0, impl=None):
    k = impl or _impl
    return k.jac_contrib(x, tape.lin_coef, tape.bil_i, tape.bil_j, tape.bil_coef,
                         tape.hw_col, tape.hw_coef, float(delta))


def hess_contrib(tape, x, w, delta, impl=None):
    k = impl or _impl
    return k.hess_contrib(x, w, tape.bil_row, tape.bil_coef, tape.hw_row, tape.hw_col,
                          tape.hw_coef, float(delta))


def scatter_add(out, pos, vals, impl=None):
    k = impl or _impl
    return k.scatter_add(out, pos, vals)


def backends():
    """Available implementations keyed by name."""
    found = {"python": _reference}
    try:
        from . import _compiled
        found["compiled"] = _compiled
    except ImportError:
        pass
    return found
