# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; must match alc._kernels.pure semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def max_pairwise_dist(points):
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] pts = \
        np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t m = pts.shape[1]
    cdef Py_ssize_t i, j, d
    cdef double best = 0.0, acc, diff
    cdef double[:, ::1] p = pts
    if n < 2:
        return 0.0
    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                acc = 0.0
                for d in range(m):
                    diff = p[i, d] - p[j, d]
                    acc += diff * diff
                if acc > best:
                    best = acc
    return sqrt(best)


cdef int _cholesky_solve(double[:, ::1] H, double[::1] g, double[::1] d,
                         double[:, ::1] L, double[::1] w, double lam,
                         Py_ssize_t p) nogil:
    """Solve (H + lam*I) d = g via Cholesky. Returns 0 on success."""
    cdef Py_ssize_t i, j, k
    cdef double s
    for i in range(p):
        for j in range(i + 1):
            s = H[i, j]
            if i == j:
                s += lam
            for k in range(j):
                s -= L[i, k] * L[j, k]
            if i == j:
                if s <= 0.0:
                    return -1
                L[i, i] = sqrt(s)
            else:
                L[i, j] = s / L[j, j]
    # forward then backward substitution
    for i in range(p):
        s = g[i]
        for k in range(i):
            s -= L[i, k] * w[k]
        w[i] = s / L[i, i]
    for i in range(p - 1, -1, -1):
        s = w[i]
        for k in range(i + 1, p):
            s -= L[k, i] * d[k]
        d[i] = s / L[i, i]
    return 0


cdef double _residual(double[:, :, ::1] T, double[::1] y, double[::1] a,
                      double[::1] b, double[::1] f,
                      Py_ssize_t n, Py_ssize_t r, Py_ssize_t t) nogil:
    cdef Py_ssize_t q, i, j
    cdef double s, nrm = 0.0
    for q in range(n):
        s = -y[q]
        for i in range(r):
            for j in range(t):
                s += a[i] * b[j] * T[q, i, j]
        f[q] = s
        nrm += s * s
    return sqrt(nrm)


cdef struct LMResult:
    double resid
    int converged
    int iters


cdef LMResult _lm_run(double[:, :, ::1] Tv, double[::1] yv, double[::1] theta,
                      double resid_tol, int max_iter, double lam0,
                      double[::1] a, double[::1] b, double[::1] f,
                      double[::1] f_try, double[::1] g, double[::1] d,
                      double[::1] w, double[::1] trial,
                      double[:, ::1] J, double[:, ::1] H,
                      double[:, ::1] L) nogil:
    cdef Py_ssize_t n = Tv.shape[0]
    cdef Py_ssize_t r = Tv.shape[1]
    cdef Py_ssize_t t = Tv.shape[2]
    cdef Py_ssize_t p = r + t - 1
    cdef double lam = lam0, rn, rn_try, s, dn, tn, gn
    cdef Py_ssize_t q, i, j
    cdef LMResult out
    out.iters = 0

    a[0] = 1.0
    for i in range(r - 1):
        a[i + 1] = theta[i]
    for j in range(t):
        b[j] = theta[r - 1 + j]
    rn = _residual(Tv, yv, a, b, f, n, r, t)

    while out.iters < max_iter:
        if rn <= resid_tol:
            break
        # Jacobian: columns for a_1..a_{r-1}, then b_0..b_{t-1}
        for q in range(n):
            for i in range(1, r):
                s = 0.0
                for j in range(t):
                    s += b[j] * Tv[q, i, j]
                J[q, i - 1] = s
            for j in range(t):
                s = 0.0
                for i in range(r):
                    s += a[i] * Tv[q, i, j]
                J[q, r - 1 + j] = s
        for i in range(p):
            for j in range(i + 1):
                s = 0.0
                for q in range(n):
                    s += J[q, i] * J[q, j]
                H[i, j] = s
                H[j, i] = s
        gn = 0.0
        for i in range(p):
            s = 0.0
            for q in range(n):
                s += J[q, i] * f[q]
            g[i] = s
            gn += s * s
        if sqrt(gn) <= 1e-10 * (1.0 if rn < 1.0 else rn):
            break  # first-order stationary away from an exact fit
        out.iters += 1
        if _cholesky_solve(H, g, d, L, w, lam, p) != 0:
            lam *= 4.0
            continue
        for i in range(p):
            trial[i] = theta[i] - d[i]
        a[0] = 1.0
        for i in range(r - 1):
            a[i + 1] = trial[i]
        for j in range(t):
            b[j] = trial[r - 1 + j]
        rn_try = _residual(Tv, yv, a, b, f_try, n, r, t)
        if rn_try < rn:
            for i in range(p):
                theta[i] = trial[i]
            for q in range(n):
                f[q] = f_try[q]
            lam *= 0.5
            dn = 0.0
            tn = 0.0
            for i in range(p):
                dn += d[i] * d[i]
                tn += theta[i] * theta[i]
            if rn - rn_try <= 1e-9 * rn and rn_try > resid_tol:
                rn = rn_try
                break  # stalled on a plateau away from an exact fit
            rn = rn_try
            if sqrt(dn) < 1e-14 * (1.0 + sqrt(tn)):
                break
        else:
            # restore a, b to the current theta
            a[0] = 1.0
            for i in range(r - 1):
                a[i + 1] = theta[i]
            for j in range(t):
                b[j] = theta[r - 1 + j]
            lam *= 4.0
            if lam > 1e12:
                break
    out.resid = rn
    out.converged = 1 if rn <= resid_tol else 0
    return out


cdef class _Workspace:
    cdef double[::1] a, b, f, f_try, g, d, w, trial
    cdef double[:, ::1] J, H, L

    def __cinit__(self, Py_ssize_t n, Py_ssize_t r, Py_ssize_t t):
        cdef Py_ssize_t p = r + t - 1
        self.a = np.empty(r)
        self.b = np.empty(t)
        self.f = np.empty(n)
        self.f_try = np.empty(n)
        self.g = np.empty(p)
        self.d = np.empty(p)
        self.w = np.empty(p)
        self.trial = np.empty(p)
        self.J = np.empty((n, p))
        self.H = np.empty((p, p))
        self.L = np.empty((p, p))


def lm_bilinear(T, y, theta0, double resid_tol, int max_iter=200,
                double lam0=1e-3):
    """Single-start damped Gauss-Newton bilinear fit; see pure.lm_bilinear."""
    cdef double[:, :, ::1] Tv = np.ascontiguousarray(T, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    theta_arr = np.array(theta0, dtype=np.float64, copy=True)
    cdef double[::1] theta = theta_arr
    cdef _Workspace ws = _Workspace(Tv.shape[0], Tv.shape[1], Tv.shape[2])
    cdef LMResult res
    with nogil:
        res = _lm_run(Tv, yv, theta, resid_tol, max_iter, lam0,
                      ws.a, ws.b, ws.f, ws.f_try, ws.g, ws.d, ws.w, ws.trial,
                      ws.J, ws.H, ws.L)
    return theta_arr, res.resid, bool(res.converged), res.iters


def lm_bilinear_multi(T, y, theta0s, double resid_tol, int max_iter=200,
                      double lam0=1e-3):
    """Run starts from the rows of theta0s until one converges.

    Returns (theta, resid, converged, start_index, best_resid) where
    start_index is the first converged row (-1 if none) and best_resid is
    the smallest residual norm over all attempted starts.
    """
    cdef double[:, :, ::1] Tv = np.ascontiguousarray(T, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    inits = np.ascontiguousarray(theta0s, dtype=np.float64)
    cdef double[:, ::1] iv = inits
    cdef Py_ssize_t n_starts = iv.shape[0]
    theta_arr = np.empty(iv.shape[1])
    cdef double[::1] theta = theta_arr
    cdef _Workspace ws = _Workspace(Tv.shape[0], Tv.shape[1], Tv.shape[2])
    cdef LMResult res
    cdef double best = np.inf
    cdef Py_ssize_t s, i, hit = -1
    with nogil:
        for s in range(n_starts):
            for i in range(iv.shape[1]):
                theta[i] = iv[s, i]
            res = _lm_run(Tv, yv, theta, resid_tol, max_iter, lam0,
                          ws.a, ws.b, ws.f, ws.f_try, ws.g, ws.d, ws.w,
                          ws.trial, ws.J, ws.H, ws.L)
            if res.resid < best:
                best = res.resid
            if res.converged:
                hit = s
                break
    return theta_arr, res.resid, hit >= 0, int(hit), float(best)
