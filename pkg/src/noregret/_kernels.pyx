# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; mirrors ``_pykernels`` routine for routine."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, INFINITY
from libc.stdlib cimport qsort, malloc, free

cnp.import_array()

MODE_ENTROPY = 0
MODE_EUCLIDEAN_SIMPLEX = 1


cdef int _cmp_desc(const void* a, const void* b) noexcept nogil:
    cdef double x = (<double*>a)[0]
    cdef double y = (<double*>b)[0]
    if x < y:
        return 1
    if x > y:
        return -1
    return 0


cdef double _lse(const double[::1] y) noexcept nogil:
    cdef Py_ssize_t i, d = y.shape[0]
    cdef double m = y[0], s = 0.0
    for i in range(1, d):
        if y[i] > m:
            m = y[i]
    for i in range(d):
        s += exp(y[i] - m)
    return m + log(s)


cdef void _logit(const double[::1] y, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, d = y.shape[0]
    cdef double m = y[0], s = 0.0
    for i in range(1, d):
        if y[i] > m:
            m = y[i]
    for i in range(d):
        out[i] = exp(y[i] - m)
        s += out[i]
    for i in range(d):
        out[i] = out[i] / s


cdef void _sort_desc(double* z, Py_ssize_t d) noexcept nogil:
    # insertion sort beats qsort's comparator calls on short rows
    cdef Py_ssize_t i, j
    cdef double v
    if d > 32:
        qsort(z, d, sizeof(double), _cmp_desc)
        return
    for i in range(1, d):
        v = z[i]
        j = i - 1
        while j >= 0 and z[j] < v:
            z[j + 1] = z[j]
            j -= 1
        z[j + 1] = v


cdef void _proj_simplex_ptr(const double* y, double* out, double* z, Py_ssize_t d) noexcept nogil:
    # z: scratch buffer of length d
    cdef Py_ssize_t i
    cdef double cs = 0.0, tau = 0.0, t
    for i in range(d):
        z[i] = y[i]
    _sort_desc(z, d)
    for i in range(d):
        cs += z[i]
        t = (cs - 1.0) / (i + 1)
        if z[i] - t > 0:
            tau = t
    for i in range(d):
        t = y[i] - tau
        out[i] = t if t > 0.0 else 0.0


cdef void _proj_simplex(const double[::1] y, double[::1] out, double* z) noexcept nogil:
    _proj_simplex_ptr(&y[0], &out[0], z, y.shape[0])


def logsumexp(y):
    cdef double[::1] v = np.ascontiguousarray(y, dtype=np.float64)
    return _lse(v)


def logit(y):
    cdef double[::1] v = np.ascontiguousarray(y, dtype=np.float64)
    out = np.empty(v.shape[0])
    _logit(v, out)
    return out


def logsumexp_rows(Y):
    cdef double[:, ::1] A = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t r, n = A.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    for r in range(n):
        o[r] = _lse(A[r])
    return out


def logit_rows(Y):
    cdef double[:, ::1] A = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t r, n = A.shape[0]
    out = np.empty((n, A.shape[1]))
    cdef double[:, ::1] o = out
    for r in range(n):
        _logit(A[r], o[r])
    return out


def project_simplex(y):
    cdef double[::1] v = np.ascontiguousarray(y, dtype=np.float64)
    out = np.empty(v.shape[0])
    cdef double* z = <double*>malloc(v.shape[0] * sizeof(double))
    try:
        _proj_simplex(v, out, z)
    finally:
        free(z)
    return out


def project_simplex_rows(Y):
    cdef double[:, ::1] A = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t r, n = A.shape[0], d = A.shape[1]
    out = np.empty((n, d))
    if n == 0 or d == 0:
        return out
    cdef double[:, ::1] o = out
    cdef double* z = <double*>malloc(d * sizeof(double))
    try:
        with nogil:
            for r in range(n):
                _proj_simplex_ptr(&A[r, 0], &o[r, 0], z, d)
    finally:
        free(z)
    return out


def badoiu_clarkson(points, long iters):
    cdef double[:, ::1] P = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t m = P.shape[0], d = P.shape[1], i, j, far
    cdef long k
    c_arr = np.array(P[0], dtype=np.float64)
    best = c_arr.copy()
    cdef double[::1] c = c_arr
    cdef double[::1] b = best
    cdef double d2, t, far_d2, w, best_r2 = INFINITY
    for k in range(1, iters + 1):
        far = 0
        far_d2 = -1.0
        for i in range(m):
            d2 = 0.0
            for j in range(d):
                t = P[i, j] - c[j]
                d2 += t * t
            if d2 > far_d2:
                far = i
                far_d2 = d2
        if far_d2 < best_r2:
            best_r2 = far_d2
            for j in range(d):
                b[j] = c[j]
            if far_d2 == 0.0:
                break
        w = 1.0 / (k + 1)
        for j in range(d):
            c[j] += (P[far, j] - c[j]) * w
    return best, sqrt(best_r2)


cdef void _choice(const double[::1] y, int mode, const double[::1] center,
                  double[::1] tmp, double[::1] out, double* z) noexcept nogil:
    cdef Py_ssize_t j
    if mode == 0:
        _logit(y, out)
    else:
        for j in range(y.shape[0]):
            tmp[j] = y[j] + center[j]
        _proj_simplex(tmp, out, z)


def dual_averaging_run(payoffs, etas, int mode, center):
    cdef double[:, ::1] P = np.ascontiguousarray(payoffs, dtype=np.float64)
    cdef double[::1] eta = np.ascontiguousarray(etas, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(center, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0], d = P.shape[1], k, j
    X = np.empty((n + 1, d))
    cdef double[:, ::1] x = X
    cdef double[::1] U = np.zeros(d)
    cdef double[::1] y = np.zeros(d)
    cdef double[::1] tmp = np.empty(d)
    cdef double* z = <double*>malloc(d * sizeof(double))
    try:
        _choice(y, mode, c, tmp, x[0], z)
        for k in range(n):
            for j in range(d):
                U[j] += P[k, j]
                y[j] = eta[k + 1] * U[j]
            _choice(y, mode, c, tmp, x[k + 1], z)
    finally:
        free(z)
    return X


def best_response_run(Py_ssize_t d, Py_ssize_t n, double M, etas, int mode, center):
    cdef double[::1] eta = np.ascontiguousarray(etas, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(center, dtype=np.float64)
    cdef Py_ssize_t k, j, amin
    X = np.empty((n + 1, d))
    Pay = np.empty((n, d))
    cdef double[:, ::1] x = X
    cdef double[:, ::1] p = Pay
    cdef double[::1] U = np.zeros(d)
    cdef double[::1] y = np.zeros(d)
    cdef double[::1] tmp = np.empty(d)
    cdef double* z = <double*>malloc(d * sizeof(double))
    try:
        _choice(y, mode, c, tmp, x[0], z)
        for k in range(n):
            amin = 0
            for j in range(1, d):
                if x[k, j] < x[k, amin]:
                    amin = j
            for j in range(d):
                p[k, j] = M if j == amin else -M
                U[j] += p[k, j]
                y[j] = eta[k + 1] * U[j]
            _choice(y, mode, c, tmp, x[k + 1], z)
    finally:
        free(z)
    return X, Pay
