# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the tape evaluation kernels.

Same signatures and results as ``_reference``; loops replace the numpy
temporaries, which is what matters on the small per-iteration arrays of the
interior-point subsolver.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()

cdef double HW_EXP = 0.852


cdef inline double _hw_value(double q, double delta) nogil:
    if delta > 0.0:
        return q * pow(q * q + delta * delta, 0.5 * HW_EXP)
    return q * pow(fabs(q), HW_EXP)


cdef inline double _hw_deriv(double q, double delta) nogil:
    cdef double w
    if delta > 0.0:
        w = q * q + delta * delta
        return pow(w, 0.5 * HW_EXP) + HW_EXP * q * q * pow(w, 0.5 * HW_EXP - 1.0)
    return (1.0 + HW_EXP) * pow(fabs(q), HW_EXP)


cdef inline double _hw_second(double q, double delta) nogil:
    cdef double w = q * q + delta * delta
    return (3.0 * HW_EXP * q * pow(w, 0.5 * HW_EXP - 1.0)
            + HW_EXP * (HW_EXP - 2.0) * q * q * q * pow(w, 0.5 * HW_EXP - 2.0))


def hw_value(q, double delta):
    q = np.asarray(q, dtype=float)
    cdef double[::1] qv = np.ascontiguousarray(q).ravel()
    out = np.empty(qv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t k
    for k in range(qv.shape[0]):
        ov[k] = _hw_value(qv[k], delta)
    return out.reshape(q.shape) if q.ndim else float(out[0])


def hw_deriv(q, double delta):
    q = np.asarray(q, dtype=float)
    cdef double[::1] qv = np.ascontiguousarray(q).ravel()
    out = np.empty(qv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t k
    for k in range(qv.shape[0]):
        ov[k] = _hw_deriv(qv[k], delta)
    return out.reshape(q.shape) if q.ndim else float(out[0])


def hw_second(q, double delta):
    q = np.asarray(q, dtype=float)
    cdef double[::1] qv = np.ascontiguousarray(q).ravel()
    out = np.empty(qv.shape[0])
    cdef double[::1] ov = out
    cdef Py_ssize_t k
    for k in range(qv.shape[0]):
        ov[k] = _hw_second(qv[k], delta)
    return out.reshape(q.shape) if q.ndim else float(out[0])


def residuals(const double[::1] x, Py_ssize_t m, const double[::1] const_,
              const cnp.intp_t[::1] lin_row, const cnp.intp_t[::1] lin_col, const double[::1] lin_coef,
              const cnp.intp_t[::1] bil_row, const cnp.intp_t[::1] bil_i, const cnp.intp_t[::1] bil_j,
              const double[::1] bil_coef,
              const cnp.intp_t[::1] hw_row, const cnp.intp_t[::1] hw_col, const double[::1] hw_coef,
              double delta):
    out = np.empty(m)
    cdef double[::1] o = out
    cdef Py_ssize_t k
    with nogil:
        for k in range(m):
            o[k] = const_[k]
        for k in range(lin_row.shape[0]):
            o[lin_row[k]] += lin_coef[k] * x[lin_col[k]]
        for k in range(bil_row.shape[0]):
            o[bil_row[k]] += bil_coef[k] * x[bil_i[k]] * x[bil_j[k]]
        for k in range(hw_row.shape[0]):
            o[hw_row[k]] += hw_coef[k] * _hw_value(x[hw_col[k]], delta)
    return out


def jac_contrib(const double[::1] x, const double[::1] lin_coef,
                const cnp.intp_t[::1] bil_i, const cnp.intp_t[::1] bil_j, const double[::1] bil_coef,
                const cnp.intp_t[::1] hw_col, const double[::1] hw_coef, double delta):
    cdef Py_ssize_t nl = lin_coef.shape[0], nb = bil_coef.shape[0], nh = hw_coef.shape[0]
    out = np.empty(nl + 2 * nb + nh)
    cdef double[::1] o = out
    cdef Py_ssize_t k
    with nogil:
        for k in range(nl):
            o[k] = lin_coef[k]
        for k in range(nb):
            o[nl + k] = bil_coef[k] * x[bil_j[k]]
            o[nl + nb + k] = bil_coef[k] * x[bil_i[k]]
        for k in range(nh):
            o[nl + 2 * nb + k] = hw_coef[k] * _hw_deriv(x[hw_col[k]], delta)
    return out


def hess_contrib(const double[::1] x, const double[::1] w,
                 const cnp.intp_t[::1] bil_row, const double[::1] bil_coef,
                 const cnp.intp_t[::1] hw_row, const cnp.intp_t[::1] hw_col, const double[::1] hw_coef,
                 double delta):
    cdef Py_ssize_t nb = bil_coef.shape[0], nh = hw_coef.shape[0]
    out = np.empty(2 * nb + nh)
    cdef double[::1] o = out
    cdef Py_ssize_t k
    cdef double v
    with nogil:
        for k in range(nb):
            v = w[bil_row[k]] * bil_coef[k]
            o[k] = v
            o[nb + k] = v
        for k in range(nh):
            o[2 * nb + k] = w[hw_row[k]] * hw_coef[k] * _hw_second(x[hw_col[k]], delta)
    return out


def scatter_add(double[::1] out, const cnp.intp_t[::1] pos, const double[::1] vals):
    cdef Py_ssize_t k
    with nogil:
        for k in range(pos.shape[0]):
            out[pos[k]] += vals[k]
    return np.asarray(out)
