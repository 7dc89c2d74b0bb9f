# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Hot loop for oriented-box membership counting.

Given sample points and a family of oriented boxes (center, orthonormal
axes, half-widths, complex amplitude), accumulates for every point the
number of boxes containing it and the amplitude sum.  This is the inner
loop of every Monte-Carlo overlap estimate; see conelab.kernels for the
pure-numpy fallback with the same signature.
"""

import numpy as np

cimport cython


@cython.boundscheck(False)
@cython.wraparound(False)
def box_field(double[:, ::1] points, double[:, ::1] centers,
              double[:, :, ::1] axes, double[:, ::1] half_widths,
              double complex[::1] amplitudes):
    cdef Py_ssize_t m = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t nb = centers.shape[0]
    cdef Py_ssize_t i, b, k, j
    cdef double y, dx0, dx1, dx2
    cdef int inside
    counts_arr = np.zeros(m, dtype=np.int32)
    field_arr = np.zeros(m, dtype=np.complex128)
    cdef int[::1] counts = counts_arr
    cdef double complex[::1] field = field_arr
    cdef double[3] dx
    for i in range(m):
        for b in range(nb):
            inside = 1
            for j in range(d):
                dx[j] = points[i, j] - centers[b, j]
            for k in range(d):
                y = 0.0
                for j in range(d):
                    y += axes[b, k, j] * dx[j]
                if y > half_widths[b, k] or y < -half_widths[b, k]:
                    inside = 0
                    break
            if inside:
                counts[i] += 1
                field[i] = field[i] + amplitudes[b]
    return counts_arr, field_arr
