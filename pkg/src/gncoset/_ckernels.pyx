# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled decoding kernels.

Same entry points and results as ``gncoset._pykernels``; the frame loop
runs without the GIL so callers may fan blocks of frames over threads.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport tanh, atanh, fabs
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memset

cnp.import_array()

ctypedef unsigned char u8

cdef double LLR_MAX_C = 128.0
cdef double ATANH_LIMIT = 1.0 - 1e-15

LLR_MAX = LLR_MAX_C


cdef inline double _clamp(double x) noexcept nogil:
    if x > LLR_MAX_C:
        return LLR_MAX_C
    if x < -LLR_MAX_C:
        return -LLR_MAX_C
    return x


cdef inline double _f(double a, double b, int exact) noexcept nogil:
    cdef double p, m
    if exact:
        p = tanh(a * 0.5) * tanh(b * 0.5)
        if p > ATANH_LIMIT:
            p = ATANH_LIMIT
        elif p < -ATANH_LIMIT:
            p = -ATANH_LIMIT
        return 2.0 * atanh(p)
    m = fabs(a) if fabs(a) < fabs(b) else fabs(b)
    if (a > 0.0 and b > 0.0) or (a < 0.0 and b < 0.0):
        return m
    if a == 0.0 or b == 0.0:
        return 0.0
    return -m


cdef void _sc(const double* llr, int length, const u8* frozen, u8* x,
              double* scratch, int exact) noexcept nogil:
    # scratch must hold at least `length` doubles
    cdef int h, i
    cdef double* child
    if length == 1:
        x[0] = 1 if (llr[0] < 0.0 and not frozen[0]) else 0
        return
    h = length // 2
    child = scratch
    for i in range(h):
        child[i] = _f(llr[i], llr[h + i], exact)
    _sc(child, h, frozen, x, scratch + h, exact)
    for i in range(h):
        child[i] = llr[h + i] + (1.0 - 2.0 * x[i]) * llr[i]
    _sc(child, h, frozen + h, x + h, scratch + h, exact)
    for i in range(h):
        x[i] ^= x[h + i]


cdef void _transform(u8* v, int length) noexcept nogil:
    cdef int h = 1, start, i
    while h < length:
        start = 0
        while start < length:
            for i in range(start, start + h):
                v[i] ^= v[i + h]
            start += 2 * h
        h *= 2


def sc_decode_batch(llr, frozen_mask, int kernel=0):
    cdef double[:, ::1] L = np.ascontiguousarray(
        np.clip(np.asarray(llr, dtype=np.float64), -LLR_MAX_C, LLR_MAX_C))
    cdef u8[::1] fz = np.ascontiguousarray(frozen_mask, dtype=np.uint8)
    cdef Py_ssize_t b, length = fz.shape[0]
    if L.shape[1] != length:
        raise ValueError("llr must have shape (batch, len(frozen_mask))")
    out = np.zeros((L.shape[0], length), dtype=np.uint8)
    cdef u8[:, ::1] X = out
    cdef double* scratch = <double*> malloc(length * sizeof(double))
    try:
        with nogil:
            for b in range(L.shape[0]):
                _sc(&L[b, 0], <int> length, &fz[0], &X[b, 0], scratch, kernel)
    finally:
        free(scratch)
    return out


cdef int _decode_one(const double* lch, u8* out, int* acts, int s, int t_max,
                     const u8* col_frozen, const u8* row_frozen,
                     const double* alpha, const double* beta, const double* gamma,
                     double scale, int start_rows, int early_exit, int exact,
                     u8* mats, u8* comp, double* cllr, double* scratch,
                     u8* e_col, u8* e_row) noexcept nogil:
    cdef int n_bits = s * s
    cdef u8* prev = mats
    cdef u8* prev2 = mats + n_bits
    cdef u8* new = mats + 2 * n_bits
    cdef u8* tmp
    cdef int t, i, j, k, graph, err, a, base, step
    cdef const u8* frozen
    cdef u8* e_this
    cdef const u8* e_other
    cdef double hp, hp2, l
    memset(mats, 0, 3 * n_bits)
    memset(e_col, 0, s)
    memset(e_row, 0, s)
    t = 0
    for t in range(1, t_max + 1):
        if t % 2:
            graph = 1 if start_rows else 0
        else:
            graph = 0 if start_rows else 1
        if graph == 0:
            frozen = col_frozen
            e_this = e_col
            e_other = e_row
            step = s
        else:
            frozen = row_frozen
            e_this = e_row
            e_other = e_col
            step = 1
        a = 0
        for i in range(s):
            base = i if graph == 0 else i * s
            for j in range(s):
                comp[j] = prev[base + j * step]
            if t == 1:
                err = 1
            else:
                # syndrome check on a scratch copy of the component
                memcpy(comp + s, comp, s)
                _transform(comp + s, s)
                err = 0
                for j in range(s):
                    if frozen[j] and comp[s + j]:
                        err = 1
                        break
            e_this[i] = err
            if not err:
                for j in range(s):
                    new[base + j * step] = comp[j]
                continue
            a += 1
            for j in range(s):
                k = base + j * step
                hp = 1.0 - 2.0 * prev[k]
                if e_other[j]:
                    hp2 = 1.0 - 2.0 * prev2[k]
                    l = lch[k] + scale * (alpha[t - 1] * hp - beta[t - 1] * hp2)
                else:
                    l = lch[k] + scale * gamma[t - 1] * hp
                cllr[j] = _clamp(l)
            _sc(cllr, s, frozen, comp, scratch, exact)
            for j in range(s):
                new[base + j * step] = comp[j]
        acts[t - 1] = a
        tmp = prev2
        prev2 = prev
        prev = new
        new = tmp
        if early_exit and t >= 3 and a == 0 and acts[t - 2] == 0:
            break
    memcpy(out, prev, n_bits)
    return t


def decode_frames(llr_ch, col_frozen, row_frozen, alpha, beta, gamma, int t_max,
                  double sigma2, bint start_rows=True, bint early_exit=False, int kernel=0):
    cdef double[:, ::1] L = np.ascontiguousarray(np.atleast_2d(llr_ch), dtype=np.float64)
    cdef u8[::1] cf = np.ascontiguousarray(col_frozen, dtype=np.uint8)
    cdef u8[::1] rf = np.ascontiguousarray(row_frozen, dtype=np.uint8)
    cdef double[::1] al = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef double[::1] be = np.ascontiguousarray(beta, dtype=np.float64)
    cdef double[::1] ga = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef int s = cf.shape[0]
    cdef Py_ssize_t frames = L.shape[0], f
    if s * s != L.shape[1]:
        raise ValueError("frozen masks do not match the frame length")
    if al.shape[0] < t_max or be.shape[0] < t_max or ga.shape[0] < t_max:
        raise ValueError("schedule shorter than t_max")
    out = np.zeros((frames, s * s), dtype=np.uint8)
    acts = np.zeros((frames, t_max), dtype=np.int32)
    iters = np.zeros(frames, dtype=np.int32)
    cdef u8[:, ::1] O = out
    cdef int[:, ::1] A = acts
    cdef int[::1] I = iters
    cdef double scale = 2.0 / sigma2
    cdef u8* mats = <u8*> malloc(3 * s * s + 4 * s)
    cdef double* dbuf = <double*> malloc(2 * s * sizeof(double))
    if mats == NULL or dbuf == NULL:
        free(mats)
        free(dbuf)
        raise MemoryError()
    try:
        with nogil:
            for f in range(frames):
                I[f] = _decode_one(&L[f, 0], &O[f, 0], &A[f, 0], s, t_max,
                                   &cf[0], &rf[0], &al[0], &be[0], &ga[0], scale,
                                   start_rows, early_exit, kernel,
                                   mats, mats + 3 * s * s, dbuf, dbuf + s,
                                   mats + 3 * s * s + 2 * s, mats + 3 * s * s + 3 * s)
    finally:
        free(mats)
        free(dbuf)
    return out, acts, iters
