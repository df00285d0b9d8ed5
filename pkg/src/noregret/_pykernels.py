"""Pure-Python/numpy kernels.

Reference implementation of every routine in ``_kernels.pyx``; selected
automatically when the compiled extension is unavailable.
"""
import math

import numpy as np

MODE_ENTROPY = 0
MODE_EUCLIDEAN_SIMPLEX = 1


def logsumexp(y):
    y = np.asarray(y, dtype=float)
    m = y.max()
    return float(m + math.log(np.exp(y - m).sum()))


def logit(y):
    y = np.asarray(y, dtype=float)
    e = np.exp(y - y.max())
    return e / e.sum()


def logsumexp_rows(Y):
    Y = np.asarray(Y, dtype=float)
    m = Y.max(axis=1)
    return m + np.log(np.exp(Y - m[:, None]).sum(axis=1))


def logit_rows(Y):
    Y = np.asarray(Y, dtype=float)
    e = np.exp(Y - Y.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def project_simplex(y):
    y = np.asarray(y, dtype=float)
    z = np.sort(y)[::-1]
    cs = np.cumsum(z)
    k = np.arange(1, y.size + 1)
    rho = np.nonzero(z - (cs - 1.0) / k > 0)[0][-1] + 1
    tau = (cs[rho - 1] - 1.0) / rho
    return np.maximum(y - tau, 0.0)


def project_simplex_rows(Y):
    Y = np.asarray(Y, dtype=float)
    n, d = Y.shape
    z = -np.sort(-Y, axis=1)
    cs = np.cumsum(z, axis=1)
    k = np.arange(1, d + 1)
    cond = z - (cs - 1.0) / k > 0
    # the condition holds on a prefix, so its length is the threshold index
    rho = cond.sum(axis=1)
    tau = (cs[np.arange(n), rho - 1] - 1.0) / rho
    return np.maximum(Y - tau[:, None], 0.0)


def badoiu_clarkson(points, iters):
    """Return ``(center, radius)`` of the best iterate over ``iters`` steps."""
    pts = [list(map(float, p)) for p in np.asarray(points, dtype=float)]
    d = len(pts[0])
    c = list(pts[0])
    best_c, best_r2 = list(c), math.inf
    for k in range(1, int(iters) + 1):
        far, far_d2 = 0, -1.0
        for i, p in enumerate(pts):
            d2 = 0.0
            for j in range(d):
                t = p[j] - c[j]
                d2 += t * t
            if d2 > far_d2:
                far, far_d2 = i, d2
        if far_d2 < best_r2:
            best_r2 = far_d2
            best_c = list(c)
            if far_d2 == 0.0:
                break
        p = pts[far]
        w = 1.0 / (k + 1)
        for j in range(d):
            c[j] += (p[j] - c[j]) * w
    return np.array(best_c), math.sqrt(best_r2)


def _choice(y, mode, center):
    if mode == MODE_ENTROPY:
        return logit(y)
    return project_simplex(y + center)


def dual_averaging_run(payoffs, etas, mode, center):
    """Actions ``x_1..x_{n+1}`` of the score-averaging rule on the simplex.

    ``etas`` holds ``eta_0..eta_n``; row ``k`` of the result is
    ``Q(eta_k * U_k)`` with ``U_k`` the k-th partial sum of ``payoffs``.
    """
    payoffs = np.asarray(payoffs, dtype=float)
    etas = np.asarray(etas, dtype=float)
    n, d = payoffs.shape
    U = np.zeros((n + 1, d))
    np.cumsum(payoffs, axis=0, out=U[1:])
    Y = etas[:, None] * U
    if mode == MODE_ENTROPY:
        return logit_rows(Y)
    return project_simplex_rows(Y + np.asarray(center, dtype=float))


def best_response_run(d, n, M, etas, mode, center):
    """Play against the l-infinity best-response adversary for ``n`` stages.

    Returns the actions ``x_1..x_{n+1}`` and the payoffs ``u_1..u_n``.
    """
    etas = np.asarray(etas, dtype=float)
    center = np.asarray(center, dtype=float)
    X = np.empty((n + 1, d))
    P = np.empty((n, d))
    U = np.zeros(d)
    X[0] = _choice(U, mode, center)
    for k in range(n):
        u = np.full(d, -M)
        u[int(np.argmin(X[k]))] = M
        P[k] = u
        U += u
        X[k + 1] = _choice(etas[k + 1] * U, mode, center)
    return X, P
