# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Parlett-Reid Pfaffian kernels."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

ctypedef fused scalar:
    double
    double complex


cdef inline double _mag(scalar v) nogil:
    if scalar is double:
        return fabs(v)
    else:
        return v.real * v.real + v.imag * v.imag


cdef scalar _pf_inplace(scalar[:, ::1] a) nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t k, i, j, kp
    cdef double best, m
    cdef scalar pf = 1
    cdef scalar piv, tmp, t_i, c_i
    if n % 2:
        return 0
    for k in range(0, n - 1, 2):
        kp = k + 1
        best = _mag(a[k + 1, k])
        for i in range(k + 2, n):
            m = _mag(a[i, k])
            if m > best:
                best = m
                kp = i
        if kp != k + 1:
            for j in range(n):
                tmp = a[k + 1, j]
                a[k + 1, j] = a[kp, j]
                a[kp, j] = tmp
            for i in range(n):
                tmp = a[i, k + 1]
                a[i, k + 1] = a[i, kp]
                a[i, kp] = tmp
            pf = -pf
        piv = a[k, k + 1]
        if piv == 0:
            return 0
        pf = pf * piv
        # a[k+2:, k+2:] += tau c^T - c tau^T with tau = a[k, k+2:] / piv, c = a[k+2:, k+1]
        for i in range(k + 2, n):
            t_i = a[k, i] / piv
            c_i = a[i, k + 1]
            for j in range(k + 2, n):
                a[i, j] = a[i, j] + t_i * a[j, k + 1] - c_i * (a[k, j] / piv)
    return pf


def pfaffian_ltl(a):
    """Pfaffian of a C-contiguous float64/complex128 antisymmetric matrix (overwritten)."""
    if a.dtype == np.float64:
        return _pf_real(a)
    return _pf_complex(a)


cdef double _pf_real(double[:, ::1] a):
    cdef double r
    with nogil:
        r = _pf_inplace(a)
    return r


cdef double complex _pf_complex(double complex[:, ::1] a):
    cdef double complex r
    with nogil:
        r = _pf_inplace(a)
    return r


def pfaffian_batch(stack):
    """Pfaffians of a ``(m, d, d)`` C-contiguous stack (overwritten)."""
    cdef Py_ssize_t i, m = stack.shape[0]
    cdef double[:, :, ::1] rs
    cdef double complex[:, :, ::1] cs
    cdef double[::1] rout
    cdef double complex[::1] cout
    if stack.dtype == np.float64:
        rs = stack
        out = np.empty(m, dtype=np.float64)
        rout = out
        with nogil:
            for i in range(m):
                rout[i] = _pf_inplace(rs[i])
        return out
    cs = stack
    out = np.empty(m, dtype=np.complex128)
    cout = out
    with nogil:
        for i in range(m):
            cout[i] = _pf_inplace(cs[i])
    return out
