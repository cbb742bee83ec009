# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for sharp-maximal computations.

Same interface as ``oscillatk._sharp_py``.  The p = 1 path slides a Fenwick
tree over value ranks (O(N log N) per window length); p = 2 uses prefix
sums of squares; other exponents run the direct per-window loop.  Cube
maxima are propagated to cells with monotone-deque sliding maxima.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt

cnp.import_array()

BACKEND = "compiled"


cdef inline Py_ssize_t _upper_bound(const double* a, Py_ssize_t n, double x) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline void _fenwick_add(long* cnt, double* s, Py_ssize_t n,
                              Py_ssize_t pos, long dc, double dv) noexcept nogil:
    cdef Py_ssize_t i = pos
    while i <= n:
        cnt[i] += dc
        s[i] += dv
        i += i & (-i)


cdef inline void _fenwick_prefix(const long* cnt, const double* s,
                                 Py_ssize_t pos, long* out_c, double* out_s) noexcept nogil:
    cdef Py_ssize_t i = pos
    cdef long c = 0
    cdef double v = 0.0
    while i > 0:
        c += cnt[i]
        v += s[i]
        i -= i & (-i)
    out_c[0] = c
    out_s[0] = v


cdef void _osc_abs_fenwick(const double* vals, const double* prefix,
                           const long* rank, const double* sorted_vals,
                           long* cnt, double* fsum, Py_ssize_t n,
                           Py_ssize_t L, double* out) noexcept nogil:
    cdef Py_ssize_t m = n - L + 1
    cdef Py_ssize_t i, s, idx
    cdef long c
    cdef double mean, ssum, win_sum, t
    for i in range(n + 1):
        cnt[i] = 0
        fsum[i] = 0.0
    for i in range(L):
        _fenwick_add(cnt, fsum, n, rank[i] + 1, 1, vals[i])
    for s in range(m):
        win_sum = prefix[s + L] - prefix[s]
        mean = win_sum / L
        idx = _upper_bound(sorted_vals, n, mean)
        _fenwick_prefix(cnt, fsum, idx, &c, &ssum)
        t = (c * mean - ssum) + ((win_sum - ssum) - (L - c) * mean)
        out[s] = t / L
        if s + 1 < m:
            _fenwick_add(cnt, fsum, n, rank[s] + 1, -1, -vals[s])
            _fenwick_add(cnt, fsum, n, rank[s + L] + 1, 1, vals[s + L])


cdef void _osc_sq_1d(const double* prefix, const double* prefix2,
                     Py_ssize_t n, Py_ssize_t L, double* out) noexcept nogil:
    cdef Py_ssize_t m = n - L + 1
    cdef Py_ssize_t s
    cdef double mean, t2
    for s in range(m):
        mean = (prefix[s + L] - prefix[s]) / L
        t2 = (prefix2[s + L] - prefix2[s]) / L - mean * mean
        out[s] = sqrt(t2) if t2 > 0.0 else 0.0


cdef void _osc_generic_1d(const double* vals, const double* prefix,
                          Py_ssize_t n, Py_ssize_t L, double p,
                          double* out) noexcept nogil:
    cdef Py_ssize_t m = n - L + 1
    cdef Py_ssize_t s, k
    cdef double mean, acc
    for s in range(m):
        mean = (prefix[s + L] - prefix[s]) / L
        acc = 0.0
        for k in range(s, s + L):
            acc += pow(fabs(vals[k] - mean), p)
        out[s] = pow(acc / L, 1.0 / p)


cdef void _slide_max(const double* a, Py_ssize_t m, Py_ssize_t n, Py_ssize_t L,
                     Py_ssize_t* dq, double* out) noexcept nogil:
    # out[x] = max over s in [x-L+1, x] intersect [0, m) of a[s]; a is a
    # length-m array conceptually padded with -inf up to n
    cdef Py_ssize_t head = 0, tail = 0, x, lo
    for x in range(n):
        if x < m:
            while tail > head and a[dq[tail - 1]] <= a[x]:
                tail -= 1
            dq[tail] = x
            tail += 1
        lo = x - L + 1
        while tail > head and dq[head] < lo:
            head += 1
        if tail > head:
            if a[dq[head]] > out[x]:
                out[x] = a[dq[head]]


def sharp1d(const double[::1] values, double p, const long[::1] lengths, bint want_sharp):
    """Sharp function / BMO maximum over all windows with the given lengths."""
    cdef Py_ssize_t n = values.shape[0]
    vals_np = np.ascontiguousarray(values, dtype=np.float64)
    prefix_np = np.concatenate(([0.0], np.cumsum(vals_np)))
    cdef double[::1] prefix = prefix_np
    cdef double[::1] prefix2
    cdef long[::1] rank
    cdef double[::1] sorted_vals
    cdef long[::1] cnt
    cdef double[::1] fsum

    if p == 1.0:
        order = np.argsort(vals_np, kind="stable")
        rank_np = np.empty(n, dtype=np.int64)
        rank_np[order] = np.arange(n, dtype=np.int64)
        rank = rank_np
        sorted_vals = vals_np[order]
        cnt = np.zeros(n + 1, dtype=np.int64)
        fsum = np.zeros(n + 1, dtype=np.float64)
    elif p == 2.0:
        prefix2 = np.concatenate(([0.0], np.cumsum(vals_np * vals_np)))

    sharp_np = np.zeros(n) if want_sharp else None
    cdef double[::1] sharp_mv
    if want_sharp:
        sharp_mv = sharp_np
    osc_np = np.empty(n, dtype=np.float64)
    cdef double[::1] osc = osc_np
    dq_np = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] dq = dq_np

    cdef double bmo = 0.0
    cdef Py_ssize_t L, m, i
    cdef Py_ssize_t k
    for k in range(lengths.shape[0]):
        L = lengths[k]
        if L <= 1 or L > n:
            continue
        m = n - L + 1
        if p == 1.0:
            with nogil:
                _osc_abs_fenwick(&values[0], &prefix[0], &rank[0],
                                 &sorted_vals[0], &cnt[0], &fsum[0], n, L, &osc[0])
        elif p == 2.0:
            with nogil:
                _osc_sq_1d(&prefix[0], &prefix2[0], n, L, &osc[0])
        else:
            with nogil:
                _osc_generic_1d(&values[0], &prefix[0], n, L, p, &osc[0])
        with nogil:
            for i in range(m):
                if osc[i] > bmo:
                    bmo = osc[i]
        if want_sharp:
            with nogil:
                _slide_max(&osc[0], m, n, L, &dq[0], &sharp_mv[0])
    return sharp_np, bmo


cdef void _osc2d(const double* vals, const double* P, const double* P2,
                 Py_ssize_t n, Py_ssize_t L, double p, double* out) noexcept nogil:
    cdef Py_ssize_t m = n - L + 1
    cdef Py_ssize_t i, j, r, c
    cdef double area = <double> (L * L)
    cdef double mean, acc, t2
    for i in range(m):
        for j in range(m):
            mean = (P[(i + L) * (n + 1) + j + L] - P[i * (n + 1) + j + L]
                    - P[(i + L) * (n + 1) + j] + P[i * (n + 1) + j]) / area
            if p == 2.0:
                t2 = (P2[(i + L) * (n + 1) + j + L] - P2[i * (n + 1) + j + L]
                      - P2[(i + L) * (n + 1) + j] + P2[i * (n + 1) + j]) / area \
                     - mean * mean
                out[i * m + j] = sqrt(t2) if t2 > 0.0 else 0.0
            elif p == 1.0:
                acc = 0.0
                for r in range(i, i + L):
                    for c in range(j, j + L):
                        acc += fabs(vals[r * n + c] - mean)
                out[i * m + j] = acc / area
            else:
                acc = 0.0
                for r in range(i, i + L):
                    for c in range(j, j + L):
                        acc += pow(fabs(vals[r * n + c] - mean), p)
                out[i * m + j] = pow(acc / area, 1.0 / p)


def sharp2d(const double[:, ::1] values, double p, const long[::1] sides, bint want_sharp):
    """2-d analogue of :func:`sharp1d` over square windows."""
    cdef Py_ssize_t n = values.shape[0]
    if values.shape[1] != n:
        raise ValueError("expected a square grid")
    vals_np = np.ascontiguousarray(values, dtype=np.float64)
    P_np = np.zeros((n + 1, n + 1))
    P_np[1:, 1:] = vals_np.cumsum(axis=0).cumsum(axis=1)
    P2_np = np.zeros((n + 1, n + 1))
    P2_np[1:, 1:] = (vals_np * vals_np).cumsum(axis=0).cumsum(axis=1)
    cdef double[:, ::1] P = P_np
    cdef double[:, ::1] P2 = P2_np

    sharp_np = np.zeros((n, n)) if want_sharp else None
    osc_np = np.empty(n * n, dtype=np.float64)
    cdef double[::1] osc = osc_np
    dq_np = np.empty(n, dtype=np.intp)

    cdef double bmo = 0.0
    cdef Py_ssize_t L, m, i, k
    for k in range(sides.shape[0]):
        L = sides[k]
        if L <= 1 or L > n:
            continue
        m = n - L + 1
        with nogil:
            _osc2d(&values[0, 0], &P[0, 0], &P2[0, 0], n, L, p, &osc[0])
            for i in range(m * m):
                if osc[i] > bmo:
                    bmo = osc[i]
        if want_sharp:
            _propagate_2d(osc_np[: m * m].reshape(m, m), n, L, sharp_np, dq_np)
    return sharp_np, bmo


def _propagate_2d(osc, Py_ssize_t n, Py_ssize_t L, sharp, dq_np):
    """Separable right-aligned sliding max of osc (m x m) into sharp (n x n)."""
    cdef Py_ssize_t m = osc.shape[0]
    rowprop_np = np.full((m, n), -np.inf)
    cdef double[:, ::1] rowprop = rowprop_np
    cdef const double[:, ::1] osc_mv = np.ascontiguousarray(osc, dtype=np.float64)
    cdef double[:, ::1] sharp_mv = sharp
    cdef Py_ssize_t[::1] dq = dq_np
    cdef double[::1] buf_in
    cdef double[::1] buf_out
    colbuf_np = np.empty(m, dtype=np.float64)
    outbuf_np = np.empty(n, dtype=np.float64)
    cdef double[::1] colbuf = colbuf_np
    cdef double[::1] outbuf = outbuf_np
    cdef Py_ssize_t i, j
    with nogil:
        # dimension 2 (columns) first: for each osc row, slide over columns
        for i in range(m):
            for j in range(n):
                outbuf[j] = -1e308
            _slide_max(&osc_mv[i, 0], m, n, L, &dq[0], &outbuf[0])
            for j in range(n):
                rowprop[i, j] = outbuf[j]
        # then dimension 1 (rows): for each output column, slide over rows
        for j in range(n):
            for i in range(m):
                colbuf[i] = rowprop[i, j]
            for i in range(n):
                outbuf[i] = -1e308
            _slide_max(&colbuf[0], m, n, L, &dq[0], &outbuf[0])
            for i in range(n):
                if outbuf[i] > sharp_mv[i, j]:
                    sharp_mv[i, j] = outbuf[i]
