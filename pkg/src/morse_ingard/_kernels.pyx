# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: CSR products, SSOR sweeps, P1 element matrices."""
import numpy as np
cimport numpy as cnp

ctypedef fused index_t:
    cnp.int32_t
    cnp.int64_t


def csr_matvec(index_t[::1] indptr, index_t[::1] indices,
               const double complex[::1] data, const double complex[::1] x):
    cdef Py_ssize_t n = indptr.shape[0] - 1, i, k
    cdef double complex s
    y = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] yv = y
    for i in range(n):
        s = 0
        for k in range(indptr[i], indptr[i + 1]):
            s = s + data[k] * x[indices[k]]
        yv[i] = s
    return y


def ssor(index_t[::1] indptr, index_t[::1] indices,
         const double complex[::1] data, const double complex[::1] r, double omega):
    """One forward plus one backward SOR sweep for ``A x = r`` from ``x = 0``."""
    cdef Py_ssize_t n = indptr.shape[0] - 1, i, k, j
    cdef double complex s, d
    x = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] xv = x
    cdef double complex[::1] diag = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        for k in range(indptr[i], indptr[i + 1]):
            if indices[k] == i:
                diag[i] = data[k]
        if diag[i] == 0:
            raise ZeroDivisionError(f"zero diagonal in row {i}")
    for i in range(n):
        s = r[i]
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if j != i:
                s = s - data[k] * xv[j]
        xv[i] = (1.0 - omega) * xv[i] + omega * s / diag[i]
    for i in range(n - 1, -1, -1):
        s = r[i]
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if j != i:
                s = s - data[k] * xv[j]
        xv[i] = (1.0 - omega) * xv[i] + omega * s / diag[i]
    return x


def p1_local(const double[:, ::1] vertices, const cnp.int64_t[:, ::1] triangles):
    """Triangle areas and 3x3 element stiffness matrices."""
    cdef Py_ssize_t nt = triangles.shape[0], t, a, b
    cdef double x0, y0, x1, y1, x2, y2, area
    cdef double bb[3]
    cdef double cc[3]
    areas = np.empty(nt)
    kloc = np.empty((nt, 3, 3))
    cdef double[::1] av = areas
    cdef double[:, :, ::1] kv = kloc
    for t in range(nt):
        x0 = vertices[triangles[t, 0], 0]; y0 = vertices[triangles[t, 0], 1]
        x1 = vertices[triangles[t, 1], 0]; y1 = vertices[triangles[t, 1], 1]
        x2 = vertices[triangles[t, 2], 0]; y2 = vertices[triangles[t, 2], 1]
        area = 0.5 * ((x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0))
        bb[0] = y1 - y2; bb[1] = y2 - y0; bb[2] = y0 - y1
        cc[0] = x2 - x1; cc[1] = x0 - x2; cc[2] = x1 - x0
        av[t] = area
        for a in range(3):
            for b in range(3):
                kv[t, a, b] = (bb[a] * bb[b] + cc[a] * cc[b]) / (4.0 * area)
    return areas, kloc
