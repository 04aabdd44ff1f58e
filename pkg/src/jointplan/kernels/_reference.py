"""Vectorised numpy kernels; the fallback when the compiled module is absent."""
import numpy as np

HW_EXP = 0.852


def hw_value(q, delta):
    if delta > 0.0:
        return q * (q * q + delta * delta) ** (0.5 * HW_EXP)
    return q * np.abs(q) ** HW_EXP


def hw_deriv(q, delta):
    if delta > 0.0:
        w = q * q + delta * delta
        return w ** (0.5 * HW_EXP) + HW_EXP * q * q * w ** (0.5 * HW_EXP - 1.0)
    return (1.0 + HW_EXP) * np.abs(q) ** HW_EXP


def hw_second(q, delta):
    # only the smoothed form is twice differentiable at 0
    w = q * q + delta * delta
    return (3.0 * HW_EXP * q * w ** (0.5 * HW_EXP - 1.0)
            + HW_EXP * (HW_EXP - 2.0) * q ** 3 * w ** (0.5 * HW_EXP - 2.0))


def residuals(x, m, const, lin_row, lin_col, lin_coef, bil_row, bil_i, bil_j, bil_coef,
              hw_row, hw_col, hw_coef, delta):
    out = np.array(const, dtype=float, copy=True)
    if len(lin_row):
        out += np.bincount(lin_row, weights=lin_coef * x[lin_col], minlength=m)
    if len(bil_row):
        out += np.bincount(bil_row, weights=bil_coef * x[bil_i] * x[bil_j], minlength=m)
    if len(hw_row):
        out += np.bincount(hw_row, weights=hw_coef * hw_value(x[hw_col], delta), minlength=m)
    return out


def jac_contrib(x, lin_coef, bil_i, bil_j, bil_coef, hw_col, hw_coef, delta):
    return np.concatenate([
        lin_coef,
        bil_coef * x[bil_j],
        bil_coef * x[bil_i],
        hw_coef * hw_deriv(x[hw_col], delta),
    ])


def hess_contrib(x, w, bil_row, bil_coef, hw_row, hw_col, hw_coef, delta):
    bil = w[bil_row] * bil_coef
    return np.concatenate([bil, bil, w[hw_row] * hw_coef * hw_second(x[hw_col], delta)])


def scatter_add(out, pos, vals):
    if len(pos):
        out += np.bincount(pos, weights=vals, minlength=len(out))
    return out
