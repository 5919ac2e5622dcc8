# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled accumulation kernels for local K-function curves.

Arithmetic order matches ``_kernels_py`` exactly so both backends give
bit-identical curves.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


def accumulate_n2(const int64_t[::1] rows,
                  const int64_t[::1] row_ptr,
                  const int64_t[::1] nbr,
                  const int64_t[::1] bins,
                  const double[::1] a,
                  const double[::1] irho,
                  const int64_t[::1] sigma,
                  const double[:, ::1] tmat,
                  const double[::1] mask1,
                  int nbins):
    cdef Py_ssize_t nr = rows.shape[0]
    out_arr = np.zeros((nr, nbins), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, p, i, j, b
    cdef int64_t si
    cdef double t, ir
    with nogil:
        for r in range(nr):
            i = rows[r]
            si = sigma[i]
            ir = irho[i]
            for p in range(row_ptr[i], row_ptr[i + 1]):
                j = nbr[p]
                t = tmat[si, sigma[j]] * mask1[j]
                out[r, bins[p]] += (a[p] * t) * ir
            for b in range(1, nbins):
                out[r, b] += out[r, b - 1]
    return out_arr


def accumulate_n3(const int64_t[::1] rows,
                  const int64_t[::1] row_ptr,
                  const int64_t[::1] nbr,
                  const int64_t[::1] bins,
                  const double[::1] a,
                  const double[::1] irho,
                  const int64_t[::1] sigma,
                  const double[:, ::1] tmat,
                  const double[::1] mask1,
                  const double[::1] mask2,
                  bint pairsum,
                  int nbins):
    cdef Py_ssize_t nr = rows.shape[0]
    out_arr = np.zeros((nr, nbins), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, p, q, i, j, l, b, bj, bl
    cdef int64_t si, sj
    cdef double t3, ir, aj, tij
    with nogil:
        for r in range(nr):
            i = rows[r]
            si = sigma[i]
            ir = irho[i]
            for p in range(row_ptr[i], row_ptr[i + 1]):
                j = nbr[p]
                sj = sigma[j]
                bj = bins[p]
                aj = a[p]
                tij = tmat[si, sj]
                for q in range(row_ptr[i], row_ptr[i + 1]):
                    if q == p:
                        continue
                    l = nbr[q]
                    bl = bins[q]
                    b = bj if bj > bl else bl
                    if pairsum:
                        t3 = (tij + tmat[si, sigma[l]]) + tmat[sj, sigma[l]]
                    else:
                        t3 = 1.0
                    t3 = t3 * (mask1[j] * mask2[l])
                    out[r, b] += ((aj * a[q]) * t3) * ir
            for b in range(1, nbins):
                out[r, b] += out[r, b - 1]
    return out_arr
