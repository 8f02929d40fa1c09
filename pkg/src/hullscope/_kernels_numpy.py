"""Pure-numpy implementations of the hot numeric kernels.

Active when HULLSCOPE_BACKEND=numpy or when numba is not importable.
The numba twins in _kernels_numba.py implement the same contracts; the
two backends agree to solver tolerance, not bit-for-bit (summation order
differs inside dot products).
"""

import numpy as np

BACKEND = "numpy"


def _clean(lam):
    lam = np.maximum(lam, 0.0)
    return lam / lam.sum()


def _fresh_gap(P, q, lam):
    x = P.T @ lam
    g = P @ (x - q)
    gap = float(g @ lam) - float(g.min())
    return x, max(gap, 0.0)


def fw_project(points, query, tol, max_iter):
    """Minimize ||points.T @ lam - query||^2 over the probability simplex.

    Frank-Wolfe with away steps and exact line search on the quadratic.
    `points` is (n, d) C-contiguous float64, `query` is (d,). Returns
    (lam, dual_gap, iterations, converged); the reported dual gap is
    recomputed from the returned coefficients, so the converged flag is
    exactly `dual_gap <= tol` for the values handed back.
    """
    P = points
    q = query
    n = P.shape[0]

    diff = P - q[None, :]
    i0 = int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
    lam = np.zeros(n)
    lam[i0] = 1.0
    x = P[i0].copy()

    it = 0
    for it in range(1, int(max_iter) + 1):
        r = x - q
        g = P @ r
        s = int(np.argmin(g))
        glam = float(g @ lam)
        gap = glam - float(g[s])
        if gap <= tol:
            # confirm on cleaned coefficients and a drift-free x; if the
            # confirmed gap disagrees, keep iterating from the refreshed
            # point instead of declaring success
            lam = _clean(lam)
            x, gap = _fresh_gap(P, q, lam)
            if gap <= tol:
                return lam, gap, it, True
            r = x - q
            g = P @ r
            s = int(np.argmin(g))
            glam = float(g @ lam)

        g_active = np.where(lam > 0.0, g, -np.inf)
        v = int(np.argmax(g_active))
        fw_desc = float(g[s]) - glam
        aw_desc = glam - float(g[v])

        if fw_desc <= aw_desc:
            u = P[s] - x
            denom = float(u @ u)
            if denom <= 1e-300:
                break
            gamma = -float(r @ u) / denom
            gamma = min(1.0, max(0.0, gamma))
            lam *= 1.0 - gamma
            lam[s] += gamma
            if gamma == 1.0:
                x = P[s].copy()
            else:
                x += gamma * u
        else:
            u = x - P[v]
            denom = float(u @ u)
            if denom <= 1e-300:
                break
            lam_v = float(lam[v])
            gmax = lam_v / (1.0 - lam_v) if lam_v < 1.0 else 1e300
            gamma = -float(r @ u) / denom
            gamma = min(gmax, max(0.0, gamma))
            lam *= 1.0 + gamma
            lam[v] -= gamma
            if gamma >= gmax:
                lam[v] = 0.0
            x += gamma * u

        # periodic refresh kills drift from the incremental x updates
        if it % 64 == 0:
            x = P.T @ lam

    lam = _clean(lam)
    _, gap = _fresh_gap(P, q, lam)
    return lam, gap, it, gap <= tol


def monomial_design(T, exponents):
    """Design matrix V[i, j] = prod_k T[i, k] ** exponents[j, k].

    `T` is (N, d) scaled coordinates, `exponents` is (m, d) int64.
    Power tables keep the multiply count at one per dimension per entry
    and fix the arithmetic order across backends.
    """
    N, d = T.shape
    m = exponents.shape[0]
    max_deg = int(exponents.max()) if m else 0
    pw = np.ones((max_deg + 1, N, d))
    for e in range(1, max_deg + 1):
        pw[e] = pw[e - 1] * T
    V = np.ones((N, m))
    for k in range(d):
        V *= pw[exponents[:, k], :, k].T
    return V
