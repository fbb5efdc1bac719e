# cython: language_level=3
"""Compiled rate kernels. Same algorithms and signatures as ``_pykernels``."""
import numpy as np

from libc.math cimport log, log1p, sqrt, INFINITY

cdef enum:
    MAXD = 32
    N_SCAN = 9

cdef double LOG2 = log(2.0)
cdef double INV_PHI = (sqrt(5.0) - 1.0) / 2.0
cdef double GOLDEN_XTOL = 1e-10


cdef struct Problem:
    int n
    int k
    double* hr          # n*k, row-major (antenna, terminal)
    double* hi
    double* e2          # UL noise, or DL terminal-side noise
    double* e2b         # DL BS-side noise
    double sigma2
    int is_dl


cdef int _chol(double* ar, double* ai, int n) noexcept nogil:
    """In-place lower Cholesky of a Hermitian matrix stored row-major; -1 if not PD."""
    cdef int i, j, m
    cdef double s, d, zr, zi
    for j in range(n):
        s = ar[j * n + j]
        for m in range(j):
            s -= ar[j * n + m] * ar[j * n + m] + ai[j * n + m] * ai[j * n + m]
        if s <= 0.0:
            return -1
        d = sqrt(s)
        ar[j * n + j] = d
        ai[j * n + j] = 0.0
        for i in range(j + 1, n):
            zr = ar[i * n + j]
            zi = ai[i * n + j]
            for m in range(j):
                # L[i,m] * conj(L[j,m])
                zr -= ar[i * n + m] * ar[j * n + m] + ai[i * n + m] * ai[j * n + m]
                zi -= ai[i * n + m] * ar[j * n + m] - ar[i * n + m] * ai[j * n + m]
            ar[i * n + j] = zr / d
            ai[i * n + j] = zi / d
    return 0


cdef double _ul_rate(Problem* pb, double* p) noexcept nogil:
    cdef int n = pb.n, k = pb.k
    cdef int a, b, j
    cdef double ar[MAXD * MAXD]
    cdef double ai[MAXD * MAXD]
    cdef double phi[MAXD]
    cdef double sr, si, logdet = 0.0, logphi = 0.0
    for a in range(n):
        phi[a] = pb.sigma2
        for j in range(k):
            phi[a] += pb.e2[a * k + j] * p[j]
    for a in range(n):
        for b in range(a + 1):
            sr = 0.0
            si = 0.0
            for j in range(k):
                # p_j h[a,j] conj(h[b,j])
                sr += p[j] * (pb.hr[a * k + j] * pb.hr[b * k + j] + pb.hi[a * k + j] * pb.hi[b * k + j])
                si += p[j] * (pb.hi[a * k + j] * pb.hr[b * k + j] - pb.hr[a * k + j] * pb.hi[b * k + j])
            ar[a * n + b] = sr
            ai[a * n + b] = si
        ar[a * n + a] += phi[a]
    if _chol(ar, ai, n) != 0:
        return -INFINITY
    for a in range(n):
        logdet += 2.0 * log(ar[a * n + a])
        logphi += log(phi[a])
    return (logdet - logphi) / LOG2


cdef double _dl_rate(Problem* pb, double* p) noexcept nogil:
    cdef int n = pb.n, k = pb.k
    cdef int a, b, j, i, m
    cdef double ar[MAXD * MAXD]
    cdef double ai[MAXD * MAXD]
    cdef double yr[MAXD]
    cdef double yi[MAXD]
    cdef double ut[MAXD]
    cdef double sr, si, q, total = 0.0
    for a in range(n):
        ut[a] = 0.0
        for j in range(k):
            ut[a] += pb.e2[a * k + j] * p[j]
    for i in range(k):
        if p[i] <= 0.0:
            continue
        for a in range(n):
            for b in range(a + 1):
                sr = 0.0
                si = 0.0
                for j in range(k):
                    if j == i:
                        continue
                    sr += p[j] * (pb.hr[a * k + j] * pb.hr[b * k + j] + pb.hi[a * k + j] * pb.hi[b * k + j])
                    si += p[j] * (pb.hi[a * k + j] * pb.hr[b * k + j] - pb.hr[a * k + j] * pb.hi[b * k + j])
                ar[a * n + b] = sr
                ai[a * n + b] = si
            sr = pb.sigma2 + ut[a]
            for j in range(k):
                if j != i:
                    sr += pb.e2b[a * k + j] * p[j]
            ar[a * n + a] += sr
        if _chol(ar, ai, n) != 0:
            return -INFINITY
        # forward substitution L y = h_i
        q = 0.0
        for a in range(n):
            sr = pb.hr[a * k + i]
            si = pb.hi[a * k + i]
            for m in range(a):
                sr -= ar[a * n + m] * yr[m] - ai[a * n + m] * yi[m]
                si -= ar[a * n + m] * yi[m] + ai[a * n + m] * yr[m]
            yr[a] = sr / ar[a * n + a]
            yi[a] = si / ar[a * n + a]
            q += yr[a] * yr[a] + yi[a] * yi[a]
        total += log1p(p[i] * q) / LOG2
    return total


cdef inline double _rate(Problem* pb, double* p) noexcept nogil:
    if pb.is_dl:
        return _dl_rate(pb, p)
    return _ul_rate(pb, p)


cdef double _eval_move(Problem* pb, double* p, double* q, int i, int j, double s, double t) noexcept nogil:
    # j < 0: single coordinate p_i = t; else transfer p_i = t, p_j = s - t
    cdef int m
    for m in range(pb.k):
        q[m] = p[m]
    q[i] = t
    if j >= 0:
        q[j] = s - t
    return _rate(pb, q)


cdef double _line_max(Problem* pb, double* p, int i, int j, double lo, double hi, double* xbest) noexcept nogil:
    cdef double q[MAXD]
    cdef double xs[N_SCAN]
    cdef double fs[N_SCAN]
    cdef double s = p[i] + (p[j] if j >= 0 else 0.0)
    cdef double step, a, c, x1, x2, f1, f2, xtol, xg, fg
    cdef int b, m
    if hi <= lo:
        xbest[0] = lo
        return _eval_move(pb, p, q, i, j, s, lo)
    step = (hi - lo) / (N_SCAN - 1)
    for m in range(N_SCAN):
        xs[m] = lo + m * step
    xs[N_SCAN - 1] = hi
    for m in range(N_SCAN):
        fs[m] = _eval_move(pb, p, q, i, j, s, xs[m])
    b = 0
    for m in range(1, N_SCAN):
        if fs[m] > fs[b]:
            b = m
    a = xs[b - 1] if b > 0 else xs[0]
    c = xs[b + 1] if b < N_SCAN - 1 else xs[N_SCAN - 1]
    x1 = c - INV_PHI * (c - a)
    x2 = a + INV_PHI * (c - a)
    f1 = _eval_move(pb, p, q, i, j, s, x1)
    f2 = _eval_move(pb, p, q, i, j, s, x2)
    xtol = GOLDEN_XTOL * (hi - lo if hi - lo > 1.0 else 1.0)
    while c - a > xtol:
        if f1 >= f2:
            c = x2
            x2 = x1
            f2 = f1
            x1 = c - INV_PHI * (c - a)
            f1 = _eval_move(pb, p, q, i, j, s, x1)
        else:
            a = x1
            x1 = x2
            f1 = f2
            x2 = a + INV_PHI * (c - a)
            f2 = _eval_move(pb, p, q, i, j, s, x2)
    if f1 >= f2:
        xg = x1
        fg = f1
    else:
        xg = x2
        fg = f2
    if fg > fs[b]:
        xbest[0] = xg
        return fg
    xbest[0] = xs[b]
    return fs[b]


cdef double _ul_ascent(Problem* pb, double* p, double pmax, double tol, int max_sweeps) noexcept nogil:
    cdef int sweep, i
    cdef double best, start, x, fx
    best = _rate(pb, p)
    for sweep in range(max_sweeps):
        start = best
        for i in range(pb.k):
            fx = _line_max(pb, p, i, -1, 0.0, pmax, &x)
            if fx > best:
                p[i] = x
                best = fx
        if best - start < tol:
            break
    return best


cdef double _dl_ascent(Problem* pb, double* p, double tol, int max_sweeps) noexcept nogil:
    cdef int sweep, i, j
    cdef double best, start, x, fx, s
    best = _rate(pb, p)
    for sweep in range(max_sweeps):
        start = best
        for i in range(pb.k):
            for j in range(i + 1, pb.k):
                s = p[i] + p[j]
                fx = _line_max(pb, p, i, j, 0.0, s, &x)
                if fx > best:
                    p[i] = x
                    p[j] = s - x
                    best = fx
        if best - start < tol:
            break
    return best


cdef double _dl_multistart(Problem* pb, double* pout, double ptot, double tol, int max_sweeps) noexcept nogil:
    cdef double p[MAXD]
    cdef int st, m
    cdef double r, best = -INFINITY
    for st in range(pb.k + 1):
        for m in range(pb.k):
            if st == 0:
                p[m] = ptot / pb.k
            else:
                p[m] = ptot if m == st - 1 else 0.0
        r = _dl_ascent(pb, p, tol, max_sweeps)
        if r > best:
            best = r
            for m in range(pb.k):
                pout[m] = p[m]
    return best


def _check_dims(int n, int k):
    if n > MAXD or k > MAXD or n < 1 or k < 1:
        raise ValueError(f"compiled kernels support 1..{MAXD} antennas/terminals")


cdef class _Buffers:
    cdef public object hr, hi, e2, e2b


cdef _Buffers _prepare(h, e2, e2b):
    cdef _Buffers b = _Buffers()
    h = np.asarray(h, dtype=np.complex128)
    b.hr = np.ascontiguousarray(h.real)
    b.hi = np.ascontiguousarray(h.imag)
    b.e2 = np.ascontiguousarray(e2, dtype=np.float64)
    b.e2b = np.ascontiguousarray(e2 if e2b is None else e2b, dtype=np.float64)
    return b


def ul_rate(h, e2, double sigma2, p):
    h = np.asarray(h)
    n, k = h.shape
    _check_dims(n, k)
    cdef _Buffers b = _prepare(h, e2, None)
    cdef double[:, ::1] hr = b.hr, hi = b.hi, ee = b.e2
    cdef double[::1] pp = np.ascontiguousarray(p, dtype=np.float64)
    cdef Problem pb
    pb.n = n; pb.k = k; pb.hr = &hr[0, 0]; pb.hi = &hi[0, 0]
    pb.e2 = &ee[0, 0]; pb.e2b = &ee[0, 0]; pb.sigma2 = sigma2; pb.is_dl = 0
    return _ul_rate(&pb, &pp[0])


def dl_rate(h, eut2, ebs2, double sigma2, p):
    h = np.asarray(h)
    n, k = h.shape
    _check_dims(n, k)
    cdef _Buffers b = _prepare(h, eut2, ebs2)
    cdef double[:, ::1] hr = b.hr, hi = b.hi, eu = b.e2, eb = b.e2b
    cdef double[::1] pp = np.ascontiguousarray(p, dtype=np.float64)
    cdef Problem pb
    pb.n = n; pb.k = k; pb.hr = &hr[0, 0]; pb.hi = &hi[0, 0]
    pb.e2 = &eu[0, 0]; pb.e2b = &eb[0, 0]; pb.sigma2 = sigma2; pb.is_dl = 1
    return _dl_rate(&pb, &pp[0])


def ul_optimize_batch(h, e2, double sigma2, double pmax, double tol=1e-7, int max_sweeps=200):
    h = np.asarray(h, dtype=np.complex128)
    cdef Py_ssize_t r = h.shape[0], idx
    cdef int n = h.shape[1], k = h.shape[2], m
    _check_dims(n, k)
    cdef double[:, :, ::1] hr = np.ascontiguousarray(h.real)
    cdef double[:, :, ::1] hi = np.ascontiguousarray(h.imag)
    cdef double[:, ::1] ee = np.ascontiguousarray(e2, dtype=np.float64)
    rates_arr = np.empty(r)
    powers_arr = np.empty((r, k))
    cdef double[::1] rates = rates_arr
    cdef double[:, ::1] powers = powers_arr
    cdef Problem pb
    pb.n = n; pb.k = k; pb.e2 = &ee[0, 0]; pb.e2b = &ee[0, 0]
    pb.sigma2 = sigma2; pb.is_dl = 0
    if r == 0:
        return rates_arr, powers_arr
    with nogil:
        for idx in range(r):
            pb.hr = &hr[idx, 0, 0]
            pb.hi = &hi[idx, 0, 0]
            for m in range(k):
                powers[idx, m] = pmax
            rates[idx] = _ul_ascent(&pb, &powers[idx, 0], pmax, tol, max_sweeps)
    return rates_arr, powers_arr


def dl_optimize_batch(h, eut2, ebs2, double sigma2, double ptot, double tol=1e-7, int max_sweeps=200):
    h = np.asarray(h, dtype=np.complex128)
    cdef Py_ssize_t r = h.shape[0], idx
    cdef int n = h.shape[1], k = h.shape[2]
    _check_dims(n, k)
    cdef double[:, :, ::1] hr = np.ascontiguousarray(h.real)
    cdef double[:, :, ::1] hi = np.ascontiguousarray(h.imag)
    cdef double[:, ::1] eu = np.ascontiguousarray(eut2, dtype=np.float64)
    cdef double[:, ::1] eb = np.ascontiguousarray(ebs2, dtype=np.float64)
    rates_arr = np.empty(r)
    powers_arr = np.empty((r, k))
    cdef double[::1] rates = rates_arr
    cdef double[:, ::1] powers = powers_arr
    cdef Problem pb
    pb.n = n; pb.k = k; pb.e2 = &eu[0, 0]; pb.e2b = &eb[0, 0]
    pb.sigma2 = sigma2; pb.is_dl = 1
    if r == 0:
        return rates_arr, powers_arr
    with nogil:
        for idx in range(r):
            pb.hr = &hr[idx, 0, 0]
            pb.hi = &hi[idx, 0, 0]
            rates[idx] = _dl_multistart(&pb, &powers[idx, 0], ptot, tol, max_sweeps)
    return rates_arr, powers_arr


def ul_optimize(h, e2, double sigma2, double pmax, double tol=1e-7, int max_sweeps=200):
    rates, powers = ul_optimize_batch(np.asarray(h)[None], e2, sigma2, pmax, tol, max_sweeps)
    return float(rates[0]), powers[0]


def dl_optimize(h, eut2, ebs2, double sigma2, double ptot, double tol=1e-7, int max_sweeps=200):
    rates, powers = dl_optimize_batch(np.asarray(h)[None], eut2, ebs2, sigma2, ptot, tol, max_sweeps)
    return float(rates[0]), powers[0]
