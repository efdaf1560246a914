# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels.

Semantics match ``_fallback.py`` exactly (same signatures, same sampling
contract); the two backends must stay interchangeable. Eigendecompositions
go straight to LAPACK's zheevd, and the exponential reconstruction plus the
chain product run as tight loops over stack-local buffers, which is where
the speedup over the numpy fallback comes from at dimension <= 16.
"""

from libc.math cimport cos, sin
from libc.stdlib cimport free, malloc

import numpy as np

from scipy.linalg.cython_lapack cimport zheevd

BACKEND = "cython"

ctypedef double complex zcx


cdef int _expi_all(zcx* hs, double coeff, zcx* out, Py_ssize_t n, int d,
                   zcx* a, double* w, zcx* work, int lwork,
                   double* rwork, int lrwork, int* iwork, int liwork) nogil:
    """exp(1j*coeff*H) for each C-order matrix in hs; returns LAPACK info."""
    cdef Py_ssize_t m
    cdef int i, j, k, info = 0
    cdef char jobz = b'V'
    cdef char uplo = b'L'
    cdef zcx ph, vik
    cdef zcx* h
    cdef zcx* o
    for m in range(n):
        h = hs + m * d * d
        o = out + m * d * d
        # LAPACK wants column-major; transpose-copy the C-order input.
        for j in range(d):
            for i in range(d):
                a[i + j * d] = h[i * d + j]
        zheevd(&jobz, &uplo, &d, a, &d, w, work, &lwork, rwork, &lrwork,
               iwork, &liwork, &info)
        if info != 0:
            return info
        for i in range(d * d):
            o[i] = 0
        for k in range(d):
            ph = cos(coeff * w[k]) + 1j * sin(coeff * w[k])
            for i in range(d):
                vik = a[i + k * d] * ph
                for j in range(d):
                    o[i * d + j] = o[i * d + j] + vik * a[j + k * d].conjugate()
    return 0


def expi_herm_batch(object hs, double coeff, object out=None):
    """Replace each Hermitian matrix H in the (n, d, d) stack by exp(1j*coeff*H)."""
    cdef zcx[:, :, ::1] h_mv = hs
    cdef Py_ssize_t n = h_mv.shape[0]
    cdef int d = <int>h_mv.shape[1]
    if h_mv.shape[2] != d:
        raise ValueError("stack entries must be square")
    if out is None:
        out = np.empty((n, d, d), dtype=np.complex128)
    cdef zcx[:, :, ::1] o_mv = out
    if n == 0:
        return out

    # Workspace query on the first matrix's shape.
    cdef int info = 0, lwork = -1, lrwork = -1, liwork = -1
    cdef char jobz = b'V'
    cdef char uplo = b'L'
    cdef zcx wkopt
    cdef double rwkopt
    cdef int iwkopt
    cdef double wdummy
    cdef zcx adummy
    zheevd(&jobz, &uplo, &d, &adummy, &d, &wdummy, &wkopt, &lwork,
           &rwkopt, &lrwork, &iwkopt, &liwork, &info)
    if info != 0:
        raise RuntimeError(f"zheevd workspace query failed (info={info})")
    lwork = <int>wkopt.real
    lrwork = <int>rwkopt
    liwork = iwkopt

    cdef zcx* a = <zcx*>malloc(d * d * sizeof(zcx))
    cdef double* w = <double*>malloc(d * sizeof(double))
    cdef zcx* work = <zcx*>malloc(lwork * sizeof(zcx))
    cdef double* rwork = <double*>malloc(lrwork * sizeof(double))
    cdef int* iwork = <int*>malloc(liwork * sizeof(int))
    if a == NULL or w == NULL or work == NULL or rwork == NULL or iwork == NULL:
        free(a); free(w); free(work); free(rwork); free(iwork)
        raise MemoryError("kernel workspace allocation failed")
    try:
        with nogil:
            info = _expi_all(&h_mv[0, 0, 0], coeff, &o_mv[0, 0, 0], n, d,
                             a, w, work, lwork, rwork, lrwork, iwork, liwork)
        if info != 0:
            raise RuntimeError(f"zheevd failed to converge (info={info})")
    finally:
        free(a); free(w); free(work); free(rwork); free(iwork)
    return out


def chain_apply(object us, object psi, object u_accum=None, long sample_every=0,
                long k_offset=0, object psi_samples=None, object u_samples=None,
                long sample_pos=0):
    """Apply a stack of unitaries in order: psi <- us[k] psi (in place).

    Mirrors the fallback: optional ordered-product accumulation into
    ``u_accum`` and stride sampling into ``psi_samples``/``u_samples`` after
    each global step index divisible by ``sample_every``. Returns the
    advanced sample position.
    """
    cdef zcx[:, :, ::1] u_mv = us
    cdef zcx[::1] p_mv = psi
    cdef Py_ssize_t n = u_mv.shape[0]
    cdef int d = <int>u_mv.shape[1]
    cdef bint have_u = u_accum is not None
    cdef bint have_ps = psi_samples is not None
    cdef bint have_us = u_samples is not None
    if sample_every > 0 and not have_ps:
        raise ValueError("sampling requested without a psi_samples buffer")

    cdef zcx[:, ::1] ua_mv = u_accum if have_u else None
    cdef zcx[:, ::1] ps_mv = psi_samples if have_ps else None
    cdef zcx[:, :, ::1] us_mv = u_samples if have_us else None

    cdef zcx* tv = <zcx*>malloc(d * sizeof(zcx))
    cdef zcx* tm = <zcx*>malloc(d * d * sizeof(zcx)) if have_u else NULL
    if tv == NULL or (have_u and tm == NULL):
        free(tv); free(tm)
        raise MemoryError("kernel workspace allocation failed")

    cdef Py_ssize_t k
    cdef int i, j, l
    cdef long pos = sample_pos
    cdef zcx acc
    try:
        with nogil:
            for k in range(n):
                for i in range(d):
                    acc = 0
                    for j in range(d):
                        acc = acc + u_mv[k, i, j] * p_mv[j]
                    tv[i] = acc
                for i in range(d):
                    p_mv[i] = tv[i]
                if have_u:
                    for i in range(d):
                        for j in range(d):
                            acc = 0
                            for l in range(d):
                                acc = acc + u_mv[k, i, l] * ua_mv[l, j]
                            tm[i * d + j] = acc
                    for i in range(d):
                        for j in range(d):
                            ua_mv[i, j] = tm[i * d + j]
                if sample_every > 0 and (k_offset + k + 1) % sample_every == 0:
                    for i in range(d):
                        ps_mv[pos, i] = p_mv[i]
                    if have_us:
                        for i in range(d):
                            for j in range(d):
                                us_mv[pos, i, j] = ua_mv[i, j]
                    pos += 1
    finally:
        free(tv)
        free(tm)
    return pos
