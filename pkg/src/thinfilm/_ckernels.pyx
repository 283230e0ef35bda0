# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stencil kernels.  Same arithmetic, same ordering as _kernels_py."""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange

cnp.import_array()


cdef void _d1_axis0(const double[:, ::1] f, double[:, ::1] out, double d,
                    bint periodic, int nthreads) noexcept nogil:
    cdef Py_ssize_t n1 = f.shape[0], n2 = f.shape[1], i, j
    cdef double h2 = 2.0 * d
    cdef double h6 = 6.0 * d
    for i in prange(1, n1 - 1, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(n2):
            out[i, j] = (f[i + 1, j] - f[i - 1, j]) / h2
    for j in range(n2):
        if periodic:
            out[0, j] = (f[1, j] - f[n1 - 1, j]) / h2
            out[n1 - 1, j] = (f[0, j] - f[n1 - 2, j]) / h2
        elif n1 >= 4:
            out[0, j] = (-11.0 * f[0, j] + 18.0 * f[1, j] - 9.0 * f[2, j] + 2.0 * f[3, j]) / h6
            out[n1 - 1, j] = (11.0 * f[n1 - 1, j] - 18.0 * f[n1 - 2, j]
                              + 9.0 * f[n1 - 3, j] - 2.0 * f[n1 - 4, j]) / h6
        else:
            out[0, j] = (-3.0 * f[0, j] + 4.0 * f[1, j] - f[2, j]) / h2
            out[n1 - 1, j] = (3.0 * f[n1 - 1, j] - 4.0 * f[n1 - 2, j] + f[n1 - 3, j]) / h2


cdef void _d1_axis1(const double[:, ::1] f, double[:, ::1] out, double d,
                    bint periodic, int nthreads) noexcept nogil:
    cdef Py_ssize_t n1 = f.shape[0], n2 = f.shape[1], i, j
    cdef double h2 = 2.0 * d
    cdef double h6 = 6.0 * d
    for i in prange(n1, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(1, n2 - 1):
            out[i, j] = (f[i, j + 1] - f[i, j - 1]) / h2
        if periodic:
            out[i, 0] = (f[i, 1] - f[i, n2 - 1]) / h2
            out[i, n2 - 1] = (f[i, 0] - f[i, n2 - 2]) / h2
        elif n2 >= 4:
            out[i, 0] = (-11.0 * f[i, 0] + 18.0 * f[i, 1] - 9.0 * f[i, 2] + 2.0 * f[i, 3]) / h6
            out[i, n2 - 1] = (11.0 * f[i, n2 - 1] - 18.0 * f[i, n2 - 2]
                              + 9.0 * f[i, n2 - 3] - 2.0 * f[i, n2 - 4]) / h6
        else:
            out[i, 0] = (-3.0 * f[i, 0] + 4.0 * f[i, 1] - f[i, 2]) / h2
            out[i, n2 - 1] = (3.0 * f[i, n2 - 1] - 4.0 * f[i, n2 - 2] + f[i, n2 - 3]) / h2


cdef void _d2_axis0(const double[:, ::1] f, double[:, ::1] out, double d,
                    bint periodic, int nthreads) noexcept nogil:
    cdef Py_ssize_t n1 = f.shape[0], n2 = f.shape[1], i, j
    cdef double dd = d * d
    for i in prange(1, n1 - 1, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(n2):
            out[i, j] = (f[i + 1, j] - 2.0 * f[i, j] + f[i - 1, j]) / dd
    for j in range(n2):
        if periodic:
            out[0, j] = (f[1, j] - 2.0 * f[0, j] + f[n1 - 1, j]) / dd
            out[n1 - 1, j] = (f[0, j] - 2.0 * f[n1 - 1, j] + f[n1 - 2, j]) / dd
        elif n1 >= 4:
            out[0, j] = (2.0 * f[0, j] - 5.0 * f[1, j] + 4.0 * f[2, j] - f[3, j]) / dd
            out[n1 - 1, j] = (2.0 * f[n1 - 1, j] - 5.0 * f[n1 - 2, j]
                              + 4.0 * f[n1 - 3, j] - f[n1 - 4, j]) / dd
        else:
            out[0, j] = out[1, j]
            out[n1 - 1, j] = out[1, j]


cdef void _d2_axis1(const double[:, ::1] f, double[:, ::1] out, double d,
                    bint periodic, int nthreads) noexcept nogil:
    cdef Py_ssize_t n1 = f.shape[0], n2 = f.shape[1], i, j
    cdef double dd = d * d
    for i in prange(n1, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(1, n2 - 1):
            out[i, j] = (f[i, j + 1] - 2.0 * f[i, j] + f[i, j - 1]) / dd
        if periodic:
            out[i, 0] = (f[i, 1] - 2.0 * f[i, 0] + f[i, n2 - 1]) / dd
            out[i, n2 - 1] = (f[i, 0] - 2.0 * f[i, n2 - 1] + f[i, n2 - 2]) / dd
        elif n2 >= 4:
            out[i, 0] = (2.0 * f[i, 0] - 5.0 * f[i, 1] + 4.0 * f[i, 2] - f[i, 3]) / dd
            out[i, n2 - 1] = (2.0 * f[i, n2 - 1] - 5.0 * f[i, n2 - 2]
                              + 4.0 * f[i, n2 - 3] - f[i, n2 - 4]) / dd
        else:
            out[i, 0] = out[i, 1]
            out[i, n2 - 1] = out[i, 1]


def first_derivative(f, double d, bint periodic, int axis, int nthreads=1):
    cdef const double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    out = np.empty((fv.shape[0], fv.shape[1]))
    cdef double[:, ::1] ov = out
    if axis == 0:
        _d1_axis0(fv, ov, d, periodic, nthreads)
    else:
        _d1_axis1(fv, ov, d, periodic, nthreads)
    return out


def second_derivative(f, double d, bint periodic, int axis, int nthreads=1):
    cdef const double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    out = np.empty((fv.shape[0], fv.shape[1]))
    cdef double[:, ::1] ov = out
    if axis == 0:
        _d2_axis0(fv, ov, d, periodic, nthreads)
    else:
        _d2_axis1(fv, ov, d, periodic, nthreads)
    return out


def derivatives(f, double d1, double d2, bint per1, bint per2, int nthreads=1):
    cdef const double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    shape = (fv.shape[0], fv.shape[1])
    f1 = np.empty(shape)
    f2 = np.empty(shape)
    f11 = np.empty(shape)
    f12 = np.empty(shape)
    f22 = np.empty(shape)
    cdef double[:, ::1] v1 = f1, v2 = f2, v11 = f11, v12 = f12, v22 = f22
    with nogil:
        _d1_axis0(fv, v1, d1, per1, nthreads)
        _d1_axis1(fv, v2, d2, per2, nthreads)
        _d2_axis0(fv, v11, d1, per1, nthreads)
        _d2_axis1(fv, v22, d2, per2, nthreads)
        _d1_axis1(v1, v12, d2, per2, nthreads)
    return f1, f2, f11, f12, f22


def reynolds_coo(K11, K12, K22, double d1, double d2, bint per1, bint per2, int nthreads=1):
    cdef const double[:, ::1] a = np.ascontiguousarray(K11, dtype=np.float64)
    cdef const double[:, ::1] b = np.ascontiguousarray(K12, dtype=np.float64)
    cdef const double[:, ::1] c22 = np.ascontiguousarray(K22, dtype=np.float64)
    cdef Py_ssize_t n1 = a.shape[0], n2 = a.shape[1]
    cdef Py_ssize_t i0 = 0 if per1 else 1
    cdef Py_ssize_t i1 = n1 if per1 else n1 - 1
    cdef Py_ssize_t j0 = 0 if per2 else 1
    cdef Py_ssize_t j1 = n2 if per2 else n2 - 1
    cdef Py_ssize_t m2 = j1 - j0
    cdef Py_ssize_t nrows = (i1 - i0) * m2
    rows_a = np.empty(9 * nrows, dtype=np.int64)
    cols_a = np.empty(9 * nrows, dtype=np.int64)
    vals_a = np.empty(9 * nrows, dtype=np.float64)
    cdef long long[::1] rows = rows_a
    cdef long long[::1] cols = cols_a
    cdef double[::1] vals = vals_a
    cdef double r1 = 1.0 / (d1 * d1)
    cdef double r2 = 1.0 / (d2 * d2)
    cdef double cc = 1.0 / (4.0 * d1 * d2)
    cdef Py_ssize_t i, j, ip, im, jp, jm, s, row
    cdef double kE, kW, kN, kS
    for i in prange(i0, i1, nogil=True, num_threads=nthreads, schedule="static"):
        for j in range(j0, j1):
            ip = (i + 1) % n1
            im = (i - 1 + n1) % n1
            jp = (j + 1) % n2
            jm = (j - 1 + n2) % n2
            s = 9 * ((i - i0) * m2 + (j - j0))
            row = i * n2 + j
            kE = 0.5 * (a[i, j] + a[ip, j]) * r1
            kW = 0.5 * (a[i, j] + a[im, j]) * r1
            kN = 0.5 * (c22[i, j] + c22[i, jp]) * r2
            kS = 0.5 * (c22[i, j] + c22[i, jm]) * r2
            rows[s] = row; cols[s] = row; vals[s] = -(kE + kW + kN + kS)
            rows[s + 1] = row; cols[s + 1] = ip * n2 + j; vals[s + 1] = kE
            rows[s + 2] = row; cols[s + 2] = im * n2 + j; vals[s + 2] = kW
            rows[s + 3] = row; cols[s + 3] = i * n2 + jp; vals[s + 3] = kN
            rows[s + 4] = row; cols[s + 4] = i * n2 + jm; vals[s + 4] = kS
            rows[s + 5] = row; cols[s + 5] = ip * n2 + jp; vals[s + 5] = cc * (b[ip, j] + b[i, jp])
            rows[s + 6] = row; cols[s + 6] = ip * n2 + jm; vals[s + 6] = -cc * (b[ip, j] + b[i, jm])
            rows[s + 7] = row; cols[s + 7] = im * n2 + jp; vals[s + 7] = -cc * (b[im, j] + b[i, jp])
            rows[s + 8] = row; cols[s + 8] = im * n2 + jm; vals[s + 8] = cc * (b[im, j] + b[i, jm])
    return rows_a, cols_a, vals_a
