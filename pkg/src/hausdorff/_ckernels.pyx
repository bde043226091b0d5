# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation of expression programs over dilation grids.

The program is executed one instruction at a time over a whole row of points,
so each instruction is a flat loop the C compiler can vectorise.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef enum:
    OP_CONST = 0
    OP_PSHIFT = 1
    OP_SUM = 2
    OP_PROD = 3
    OP_SCALE = 4


cdef extern from "_pshift.h":
    void pshift_row(const double* xr, const double* xi, long n, double s_re,
                    double s_im, double c, double lam, double* outr, double* outi,
                    double* mag) noexcept nogil


cdef void _row(const int[::1] ops, const double[:, ::1] prm, double* xr, double* xi,
               Py_ssize_t n, double[:, ::1] sr, double[:, ::1] si,
               double* mag) noexcept nogil:
    cdef Py_ssize_t k, m, i, cnt, top = 0
    cdef double ar, ai, tr, ti
    cdef double* pr
    cdef double* pi
    cdef double* qr
    cdef double* qi
    for k in range(ops.shape[0]):
        if ops[k] == OP_CONST:
            pr = &sr[top, 0]
            pi = &si[top, 0]
            for i in range(n):
                pr[i] = prm[k, 0]
                pi[i] = prm[k, 1]
            top += 1
        elif ops[k] == OP_PSHIFT:
            pshift_row(xr, xi, n, prm[k, 0], prm[k, 1], prm[k, 2], prm[k, 3],
                       &sr[top, 0], &si[top, 0], mag)
            top += 1
        elif ops[k] == OP_SUM:
            cnt = <Py_ssize_t>prm[k, 0]
            pr = &sr[top - cnt, 0]
            pi = &si[top - cnt, 0]
            for m in range(top - cnt + 1, top):
                qr = &sr[m, 0]
                qi = &si[m, 0]
                for i in range(n):
                    pr[i] += qr[i]
                    pi[i] += qi[i]
            top -= cnt - 1
        elif ops[k] == OP_PROD:
            cnt = <Py_ssize_t>prm[k, 0]
            pr = &sr[top - cnt, 0]
            pi = &si[top - cnt, 0]
            for m in range(top - cnt + 1, top):
                qr = &sr[m, 0]
                qi = &si[m, 0]
                for i in range(n):
                    tr = pr[i] * qr[i] - pi[i] * qi[i]
                    ti = pr[i] * qi[i] + pi[i] * qr[i]
                    pr[i] = tr
                    pi[i] = ti
            top -= cnt - 1
        else:
            pr = &sr[top - 1, 0]
            pi = &si[top - 1, 0]
            ar = prm[k, 0]
            ai = prm[k, 1]
            for i in range(n):
                tr = ar * pr[i] - ai * pi[i]
                ti = ar * pi[i] + ai * pr[i]
                pr[i] = tr
                pi[i] = ti


def dilated_eval(const int[::1] ops, const double[:, ::1] prm, Py_ssize_t depth,
                 const double[::1] zr, const double[::1] zi,
                 const double[::1] scales):
    """Return ``out[j, i] = f(scales[j] * z[i])`` for the compiled program ``f``."""
    cdef Py_ssize_t nz = zr.shape[0], ns = scales.shape[0], i, j
    out_r = np.empty((ns, nz), dtype=np.float64)
    out_i = np.empty((ns, nz), dtype=np.float64)
    cdef double[:, ::1] vr = out_r
    cdef double[:, ::1] vi = out_i
    cdef double[:, ::1] sr = np.empty((max(depth, 1), max(nz, 1)), dtype=np.float64)
    cdef double[:, ::1] si = np.empty((max(depth, 1), max(nz, 1)), dtype=np.float64)
    cdef double[::1] xr = np.empty(max(nz, 1), dtype=np.float64)
    cdef double[::1] xi = np.empty(max(nz, 1), dtype=np.float64)
    cdef double[::1] mag = np.empty(max(nz, 1), dtype=np.float64)
    cdef double sc
    if nz == 0:
        return np.empty((ns, 0), dtype=np.complex128)
    with nogil:
        for j in range(ns):
            sc = scales[j]
            for i in range(nz):
                xr[i] = sc * zr[i]
                xi[i] = sc * zi[i]
            _row(ops, prm, &xr[0], &xi[0], nz, sr, si, &mag[0])
            for i in range(nz):
                vr[j, i] = sr[0, i]
                vi[j, i] = si[0, i]
    out = np.empty((ns, nz), dtype=np.complex128)
    out.real = out_r
    out.imag = out_i
    return out
