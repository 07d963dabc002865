# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementations of the hot kernels (see _py_kernels for contracts).

The per-grid-point quadratic forms dominate the bootstrap replicate loop; single
row blocks take a scalar fast path, general blocks call LAPACK dsyev on the small
r x r matrix at each grid point.
"""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc
from scipy.linalg.cython_lapack cimport dsyev

cnp.import_array()

BACKEND = "compiled"


def group_moments(values, sizes):
    cdef const double[:, ::1] x = np.ascontiguousarray(values, dtype=np.float64)
    cdef const cnp.int64_t[::1] nsz = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef Py_ssize_t k = nsz.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    means_arr = np.empty((k, m), dtype=np.float64)
    var_arr = np.empty((k, m), dtype=np.float64)
    cdef double[:, ::1] means = means_arr
    cdef double[:, ::1] variances = var_arr
    cdef Py_ssize_t i, j, row, start = 0, ni
    cdef double acc, mu, dev

    for i in range(k):
        ni = nsz[i]
        for j in range(m):
            acc = 0.0
            for row in range(start, start + ni):
                acc += x[row, j]
            mu = acc / ni
            means[i, j] = mu
            acc = 0.0
            for row in range(start, start + ni):
                dev = x[row, j] - mu
                acc += dev * dev
            variances[i, j] = acc / (ni - 1)
        start += ni
    return means_arr, var_arr


cdef int _point_tf(const double[:, ::1] means, const double[:, ::1] sigma,
                   const double[:, ::1] h, const double[:, ::1] c, bint has_c,
                   Py_ssize_t row0, Py_ssize_t r, Py_ssize_t j,
                   double n_total, double rtol,
                   double* d, double* a, double* w, double* work, int lwork,
                   double* tf) nogil:
    """TF at grid point j for one block; returns a LAPACK status (0 = ok)."""
    cdef Py_ssize_t k = means.shape[0]
    cdef Py_ssize_t p, q, u
    cdef double acc, wmax, cutoff, proj, quad
    cdef int info = 0, rn = <int>r

    for p in range(r):
        acc = 0.0
        for u in range(k):
            acc += h[row0 + p, u] * means[u, j]
        if has_c:
            acc -= c[row0 + p, j]
        d[p] = acc

    if r == 1:
        acc = 0.0
        for u in range(k):
            acc += h[row0, u] * h[row0, u] * sigma[u, j]
        if acc > 0.0:
            tf[0] = n_total * d[0] * d[0] / acc
        else:
            tf[0] = 0.0
        return 0

    # A = H_l diag(sigma_j) H_l', column-major lower triangle for dsyev
    for p in range(r):
        for q in range(p, r):
            acc = 0.0
            for u in range(k):
                acc += h[row0 + p, u] * sigma[u, j] * h[row0 + q, u]
            a[p + q * r] = acc
            a[q + p * r] = acc
    dsyev("V", "L", &rn, a, &rn, w, work, &lwork, &info)
    if info != 0:
        return info
    wmax = w[r - 1]
    if wmax < 0.0:
        wmax = 0.0
    cutoff = rtol * wmax
    quad = 0.0
    for q in range(r):
        if w[q] > cutoff:
            proj = 0.0
            for p in range(r):
                proj += a[p + q * r] * d[p]
            quad += proj * proj / w[q]
    tf[0] = n_total * quad
    return 0


def block_statistics(means, sigma, h, c, bounds, double n_total, weights,
                     double rtol, bint pointwise=False):
    cdef const double[:, ::1] mu = np.ascontiguousarray(means, dtype=np.float64)
    cdef const double[:, ::1] sg = np.ascontiguousarray(sigma, dtype=np.float64)
    cdef const double[:, ::1] hm = np.ascontiguousarray(h, dtype=np.float64)
    cdef const cnp.intp_t[::1] bnd = np.ascontiguousarray(bounds, dtype=np.intp)
    cdef const double[::1] wt = np.ascontiguousarray(weights, dtype=np.float64)
    cdef bint has_c = c is not None
    cdef const double[:, ::1] cm
    if has_c:
        cm = np.ascontiguousarray(c, dtype=np.float64)
    else:
        cm = np.empty((0, 0), dtype=np.float64)

    cdef Py_ssize_t n_blocks = bnd.shape[0] - 1
    cdef Py_ssize_t m = mu.shape[1]
    stats_arr = np.zeros(n_blocks, dtype=np.float64)
    cdef double[::1] stats = stats_arr
    tf_arr = np.empty((n_blocks, m), dtype=np.float64) if pointwise else None
    cdef double[:, ::1] tf_mat
    if pointwise:
        tf_mat = tf_arr
    else:
        tf_mat = np.empty((0, 0), dtype=np.float64)

    cdef Py_ssize_t rmax = 0, l, j, row0, r
    for l in range(n_blocks):
        if bnd[l + 1] - bnd[l] > rmax:
            rmax = bnd[l + 1] - bnd[l]

    cdef int lwork = <int>(34 * rmax) if rmax > 1 else 1
    cdef double* d = <double*>malloc(rmax * sizeof(double))
    cdef double* a = <double*>malloc(rmax * rmax * sizeof(double))
    cdef double* w = <double*>malloc(rmax * sizeof(double))
    cdef double* work = <double*>malloc(lwork * sizeof(double))
    if d == NULL or a == NULL or w == NULL or work == NULL:
        free(d); free(a); free(w); free(work)
        raise MemoryError()

    cdef double tf = 0.0, acc
    cdef int info = 0
    try:
        with nogil:
            for l in range(n_blocks):
                row0 = bnd[l]
                r = bnd[l + 1] - bnd[l]
                acc = 0.0
                for j in range(m):
                    info = _point_tf(mu, sg, hm, cm, has_c, row0, r, j,
                                     n_total, rtol, d, a, w, work, lwork, &tf)
                    if info != 0:
                        break
                    acc += wt[j] * tf
                    if pointwise:
                        tf_mat[l, j] = tf
                if info != 0:
                    break
                stats[l] = acc
    finally:
        free(d); free(a); free(w); free(work)
    if info != 0:
        raise np.linalg.LinAlgError(f"dsyev failed with info={info}")
    if pointwise:
        return stats_arr, tf_arr
    return stats_arr


def replicate_statistics(values, sizes, h, bounds, weights, double rtol):
    sizes = np.ascontiguousarray(sizes, dtype=np.int64)
    cdef double n_total = float(sizes.sum())
    means, variances = group_moments(values, sizes)
    sigma = (n_total / sizes.astype(np.float64))[:, None] * variances
    return block_statistics(means, sigma, h, None, bounds, n_total, weights, rtol)
