# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled convolution kernels: direct same-padded stencils over typed
memoryviews, with the 3x3 case unrolled. Same layouts and contracts as the
numpy fallback."""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


cdef inline void _row3(double* buf, const double* xr, double w0, double w1,
                       double w2, Py_ssize_t wd) noexcept nogil:
    # one 3-tap row accumulation with zero padding at both ends
    cdef Py_ssize_t c
    buf[0] += w1 * xr[0] + w2 * xr[1]
    for c in range(1, wd - 1):
        buf[c] += w0 * xr[c - 1] + w1 * xr[c] + w2 * xr[c + 1]
    buf[wd - 1] += w0 * xr[wd - 2] + w1 * xr[wd - 1]


def conv2d(double[:, :, ::1] x, double[:, :, :, ::1] w, double[::1] b):
    cdef Py_ssize_t cout = w.shape[0], cin = w.shape[1], k = w.shape[2]
    cdef Py_ssize_t h = x.shape[1], wd = x.shape[2]
    cdef Py_ssize_t p = k // 2
    y_arr = np.empty((cout, h, wd), dtype=np.float64)
    buf_arr = np.empty(wd, dtype=np.float64)
    cdef double[:, :, ::1] y = y_arr
    cdef double[::1] buf = buf_arr
    cdef Py_ssize_t co, ci, ki, kj, r, c, rr, c0, c1, off
    cdef double wv
    if k == 3 and wd >= 2:
        with nogil:
            for co in range(cout):
                for r in range(h):
                    for c in range(wd):
                        buf[c] = b[co]
                    for ci in range(cin):
                        for ki in range(3):
                            rr = r + ki - 1
                            if rr < 0 or rr >= h:
                                continue
                            _row3(&buf[0], &x[ci, rr, 0],
                                  w[co, ci, ki, 0], w[co, ci, ki, 1],
                                  w[co, ci, ki, 2], wd)
                    for c in range(wd):
                        y[co, r, c] = buf[c]
        return y_arr
    with nogil:
        for co in range(cout):
            for r in range(h):
                for c in range(wd):
                    buf[c] = b[co]
                for ci in range(cin):
                    for ki in range(k):
                        rr = r + ki - p
                        if rr < 0 or rr >= h:
                            continue
                        for kj in range(k):
                            wv = w[co, ci, ki, kj]
                            off = kj - p
                            c0 = -off if off < 0 else 0
                            c1 = wd - off if off > 0 else wd
                            for c in range(c0, c1):
                                buf[c] += wv * x[ci, rr, c + off]
                for c in range(wd):
                    y[co, r, c] = buf[c]
    return y_arr


cdef inline void _row3_back(double* gxr, const double* gyr, double w0,
                            double w1, double w2, Py_ssize_t wd) noexcept nogil:
    # transpose of _row3: scatter gy into gx with the same 3-tap stencil
    cdef Py_ssize_t c
    gxr[0] += w1 * gyr[0] + w0 * gyr[1]
    for c in range(1, wd - 1):
        gxr[c] += w2 * gyr[c - 1] + w1 * gyr[c] + w0 * gyr[c + 1]
    gxr[wd - 1] += w2 * gyr[wd - 2] + w1 * gyr[wd - 1]


cdef inline void _row3_wgrad(double* acc, const double* gyr, const double* xr,
                             Py_ssize_t wd) noexcept nogil:
    cdef Py_ssize_t c
    cdef double a0 = 0.0, a1 = 0.0, a2 = 0.0
    for c in range(1, wd - 1):
        a0 += gyr[c] * xr[c - 1]
        a1 += gyr[c] * xr[c]
        a2 += gyr[c] * xr[c + 1]
    a1 += gyr[0] * xr[0]
    a2 += gyr[0] * xr[1]
    a0 += gyr[wd - 1] * xr[wd - 2]
    a1 += gyr[wd - 1] * xr[wd - 1]
    acc[0] += a0
    acc[1] += a1
    acc[2] += a2


def conv2d_backward(double[:, :, ::1] x, double[:, :, :, ::1] w,
                    double[:, :, ::1] gy):
    cdef Py_ssize_t cout = w.shape[0], cin = w.shape[1], k = w.shape[2]
    cdef Py_ssize_t h = x.shape[1], wd = x.shape[2]
    cdef Py_ssize_t p = k // 2
    gx_arr = np.zeros((cin, h, wd), dtype=np.float64)
    gw_arr = np.zeros((cout, cin, k, k), dtype=np.float64)
    gb_arr = np.zeros(cout, dtype=np.float64)
    cdef double[:, :, ::1] gx = gx_arr
    cdef double[:, :, :, ::1] gw = gw_arr
    cdef double[::1] gb = gb_arr
    cdef Py_ssize_t co, ci, ki, kj, r, c, rr, c0, c1, off
    cdef double wv, acc, gacc
    if k == 3 and wd >= 2:
        with nogil:
            for co in range(cout):
                gacc = 0.0
                for r in range(h):
                    for c in range(wd):
                        gacc += gy[co, r, c]
                gb[co] = gacc
                for ci in range(cin):
                    for r in range(h):
                        for ki in range(3):
                            rr = r + ki - 1
                            if rr < 0 or rr >= h:
                                continue
                            _row3_wgrad(&gw[co, ci, ki, 0], &gy[co, r, 0],
                                        &x[ci, rr, 0], wd)
                            _row3_back(&gx[ci, rr, 0], &gy[co, r, 0],
                                       w[co, ci, ki, 0], w[co, ci, ki, 1],
                                       w[co, ci, ki, 2], wd)
        return gx_arr, gw_arr, gb_arr
    with nogil:
        for co in range(cout):
            gacc = 0.0
            for r in range(h):
                for c in range(wd):
                    gacc += gy[co, r, c]
            gb[co] = gacc
            for ci in range(cin):
                for ki in range(k):
                    for kj in range(k):
                        wv = w[co, ci, ki, kj]
                        off = kj - p
                        c0 = -off if off < 0 else 0
                        c1 = wd - off if off > 0 else wd
                        acc = 0.0
                        for r in range(h):
                            rr = r + ki - p
                            if rr < 0 or rr >= h:
                                continue
                            for c in range(c0, c1):
                                acc += gy[co, r, c] * x[ci, rr, c + off]
                            for c in range(c0, c1):
                                gx[ci, rr, c + off] += wv * gy[co, r, c]
                        gw[co, ci, ki, kj] = acc
    return gx_arr, gw_arr, gb_arr
