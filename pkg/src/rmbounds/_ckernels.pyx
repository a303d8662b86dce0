# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels in ``_pykernels``.

Loops run without the GIL so sweeps can be spread over threads.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, sin, M_PI, INFINITY

cnp.import_array()


def power_1d(x, src_x, d2, alpha, double gamma):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] sx = np.ascontiguousarray(src_x, dtype=np.float64)
    cdef const double[::1] sd = np.ascontiguousarray(d2, dtype=np.float64)
    cdef const double[::1] sa = np.ascontiguousarray(alpha, dtype=np.float64)
    out = np.zeros(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, m, n = xv.shape[0], M = sx.shape[0]
    cdef double u, base, half = 0.5 * gamma
    cdef bint friis = gamma == 2.0
    with nogil:
        for m in range(M):
            for i in range(n):
                u = xv[i] - sx[m]
                base = u * u + sd[m]
                if friis:
                    ov[i] += sa[m] / base
                else:
                    ov[i] += sa[m] / pow(base, half)
    return out


def dpower_1d(x, src_x, d2, alpha):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] sx = np.ascontiguousarray(src_x, dtype=np.float64)
    cdef const double[::1] sd = np.ascontiguousarray(d2, dtype=np.float64)
    cdef const double[::1] sa = np.ascontiguousarray(alpha, dtype=np.float64)
    out = np.zeros(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, m, n = xv.shape[0], M = sx.shape[0]
    cdef double u, base
    with nogil:
        for m in range(M):
            for i in range(n):
                u = xv[i] - sx[m]
                base = u * u + sd[m]
                ov[i] += -2.0 * sa[m] * u / (base * base)
    return out


def power_2d(px, py, src_x, src_y, d2, alpha, double gamma):
    cdef const double[::1] xv = np.ascontiguousarray(px, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(py, dtype=np.float64)
    cdef const double[::1] sx = np.ascontiguousarray(src_x, dtype=np.float64)
    cdef const double[::1] sy = np.ascontiguousarray(src_y, dtype=np.float64)
    cdef const double[::1] sd = np.ascontiguousarray(d2, dtype=np.float64)
    cdef const double[::1] sa = np.ascontiguousarray(alpha, dtype=np.float64)
    out = np.zeros(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, m, n = xv.shape[0], M = sx.shape[0]
    cdef double ux, uy, base, half = 0.5 * gamma
    cdef bint friis = gamma == 2.0
    with nogil:
        for m in range(M):
            for i in range(n):
                ux = xv[i] - sx[m]
                uy = yv[i] - sy[m]
                base = ux * ux + uy * uy + sd[m]
                if friis:
                    ov[i] += sa[m] / base
                else:
                    ov[i] += sa[m] / pow(base, half)
    return out


def sinc_series(t, xn, vn, double spacing):
    cdef const double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(xn, dtype=np.float64)
    cdef const double[::1] vv = np.ascontiguousarray(vn, dtype=np.float64)
    out = np.empty(tv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, k, n = tv.shape[0], K = xv.shape[0]
    cdef double acc, u
    with nogil:
        for i in range(n):
            acc = 0.0
            for k in range(K):
                u = M_PI * (tv[i] - xv[k]) / spacing
                if u == 0.0:
                    acc += vv[k]
                else:
                    acc += vv[k] * sin(u) / u
            ov[i] = acc
    return out


def blockage_counts(tx, rx, double rx_z, boxes):
    cdef const double[:, ::1] tv = np.ascontiguousarray(
        np.asarray(tx, dtype=np.float64).reshape(-1, 3))
    cdef const double[:, ::1] rv = np.ascontiguousarray(
        np.asarray(rx, dtype=np.float64).reshape(-1, 2))
    cdef const double[:, ::1] bv = np.ascontiguousarray(
        np.asarray(boxes, dtype=np.float64).reshape(-1, 5))
    counts = np.zeros((tv.shape[0], rv.shape[0]), dtype=np.int32)
    cdef int[:, ::1] cv = counts
    cdef Py_ssize_t i, p, b, T = tv.shape[0], P = rv.shape[0], B = bv.shape[0]
    cdef double ox, oy, dx, dy, dz, s_in, s_out, s1, s2, tmp
    cdef bint hit
    with nogil:
        for i in range(T):
            for p in range(P):
                ox = rv[p, 0]
                oy = rv[p, 1]
                dx = tv[i, 0] - ox
                dy = tv[i, 1] - oy
                dz = tv[i, 2] - rx_z
                for b in range(B):
                    s_in = 0.0
                    s_out = 1.0
                    hit = True
                    if dx == 0.0:
                        if ox < bv[b, 0] or ox > bv[b, 2]:
                            hit = False
                    else:
                        s1 = (bv[b, 0] - ox) / dx
                        s2 = (bv[b, 2] - ox) / dx
                        if s1 > s2:
                            tmp = s1
                            s1 = s2
                            s2 = tmp
                        if s1 > s_in:
                            s_in = s1
                        if s2 < s_out:
                            s_out = s2
                    if hit:
                        if dy == 0.0:
                            if oy < bv[b, 1] or oy > bv[b, 3]:
                                hit = False
                        else:
                            s1 = (bv[b, 1] - oy) / dy
                            s2 = (bv[b, 3] - oy) / dy
                            if s1 > s2:
                                tmp = s1
                                s1 = s2
                                s2 = tmp
                            if s1 > s_in:
                                s_in = s1
                            if s2 < s_out:
                                s_out = s2
                    if hit and s_in < s_out and rx_z + s_in * dz < bv[b, 4]:
                        cv[i, p] += 1
    return counts
