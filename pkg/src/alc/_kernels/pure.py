"""Pure-numpy fallback kernels.

Semantics here are the reference; the compiled module in ``_core.pyx``
must agree with these functions to floating-point tolerance. Keep the
two in sync when changing the iteration logic.
"""

import numpy as np


def max_pairwise_dist(points):
    """Largest Euclidean distance between any two rows of `points`."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = pts.shape[0]
    if n < 2:
        return 0.0
    best = 0.0
    # chunked to bound the temporary at ~8 MB
    chunk = max(1, int(1_000_000 // max(n, 1)))
    for i0 in range(0, n, chunk):
        block = pts[i0 : i0 + chunk]
        d2 = ((block[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        m = d2.max()
        if m > best:
            best = m
    return float(np.sqrt(best))


def lm_bilinear(T, y, theta0, resid_tol, max_iter=200, lam0=1e-3):
    """Damped Gauss-Newton fit of y ~ sum_ij a_i b_j T[:,i,j], a_0 fixed to 1.

    Free variables are theta = (a_1..a_{r-1}, b_0..b_{t-1}). Levenberg
    damping lambda starts at `lam0`, halves on an accepted step and
    quadruples on a rejected one.

    Returns (theta, resid_norm, converged, iters).
    """
    T = np.asarray(T, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, r, t = T.shape
    theta = np.array(theta0, dtype=np.float64, copy=True)

    def split(th):
        a = np.concatenate(([1.0], th[: r - 1]))
        b = th[r - 1 :]
        return a, b

    def residual(th):
        a, b = split(th)
        return np.einsum("nij,i,j->n", T, a, b) - y

    f = residual(theta)
    rn = float(np.linalg.norm(f))
    lam = lam0
    it = 0
    while it < max_iter:
        if rn <= resid_tol:
            return theta, rn, True, it
        a, b = split(theta)
        J = np.empty((n, r + t - 1))
        if r > 1:
            J[:, : r - 1] = np.einsum("nij,j->ni", T[:, 1:, :], b)
        J[:, r - 1 :] = np.einsum("nij,i->nj", T, a)
        H = J.T @ J
        g = J.T @ f
        if float(np.linalg.norm(g)) <= 1e-10 * max(1.0, rn):
            break  # first-order stationary away from an exact fit
        it += 1
        try:
            d = np.linalg.solve(H + lam * np.eye(r + t - 1), g)
        except np.linalg.LinAlgError:
            lam *= 4.0
            continue
        trial = theta - d
        f_try = residual(trial)
        rn_try = float(np.linalg.norm(f_try))
        if rn_try < rn:
            stalled = rn - rn_try <= 1e-9 * rn and rn_try > resid_tol
            theta, f, rn = trial, f_try, rn_try
            lam *= 0.5
            if stalled:
                break  # plateau away from an exact fit
            if float(np.linalg.norm(d)) < 1e-14 * (1.0 + float(np.linalg.norm(theta))):
                break
        else:
            lam *= 4.0
            if lam > 1e12:
                break
    return theta, rn, rn <= resid_tol, it


def lm_bilinear_multi(T, y, theta0s, resid_tol, max_iter=200, lam0=1e-3):
    """Run starts from the rows of theta0s until one converges; see the
    compiled counterpart for the return contract."""
    theta0s = np.asarray(theta0s, dtype=np.float64)
    best = np.inf
    theta = rn = None
    for s in range(theta0s.shape[0]):
        theta, rn, converged, _ = lm_bilinear(T, y, theta0s[s], resid_tol,
                                              max_iter, lam0)
        best = min(best, rn)
        if converged:
            return theta, rn, True, s, float(best)
    return theta, rn, False, -1, float(best)
