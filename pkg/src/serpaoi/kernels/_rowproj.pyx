# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the numpy kernels in fallback.py.

Variance is computed from exact integer moments so the output is
bit-identical to the fallback regardless of summation order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def row_std_profile(const unsigned char[:, :] gray, Py_ssize_t x0, Py_ssize_t x1):
    cdef Py_ssize_t h = gray.shape[0]
    cdef Py_ssize_t n = x1 - x0
    if n <= 0:
        raise ValueError("empty column range")
    out = np.empty(h, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t r, c
    cdef long long s, s2, v
    cdef double var
    for r in range(h):
        s = 0
        s2 = 0
        for c in range(x0, x1):
            v = gray[r, c]
            s += v
            s2 += v * v
        var = <double> (n * s2 - s * s) / (<double> n * <double> n)
        ov[r] = sqrt(var if var > 0.0 else 0.0)
    return out


def col_std_profile(const unsigned char[:, :] gray, Py_ssize_t y0, Py_ssize_t y1):
    cdef Py_ssize_t w = gray.shape[1]
    cdef Py_ssize_t n = y1 - y0
    if n <= 0:
        raise ValueError("empty row range")
    sums = np.zeros(w, dtype=np.int64)
    sqs = np.zeros(w, dtype=np.int64)
    cdef long long[::1] sv = sums
    cdef long long[::1] qv = sqs
    cdef Py_ssize_t r, c
    cdef long long v
    for r in range(y0, y1):
        for c in range(w):
            v = gray[r, c]
            sv[c] += v
            qv[c] += v * v
    out = np.empty(w, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double var
    for c in range(w):
        var = <double> (n * qv[c] - sv[c] * sv[c]) / (<double> n * <double> n)
        ov[c] = sqrt(var if var > 0.0 else 0.0)
    return out


def point_in_boxes(const double[:] xs, const double[:] ys, const long long[:, :] boxes):
    cdef Py_ssize_t npts = xs.shape[0]
    cdef Py_ssize_t m = boxes.shape[0]
    out = np.full(npts, -1, dtype=np.int64)
    cdef long long[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double px, py
    for i in range(npts):
        px = xs[i]
        py = ys[i]
        for j in range(m):
            if (
                px >= <double> boxes[j, 0]
                and px < <double> (boxes[j, 0] + boxes[j, 2])
                and py >= <double> boxes[j, 1]
                and py < <double> (boxes[j, 1] + boxes[j, 3])
            ):
                ov[i] = j
                break
    return out
