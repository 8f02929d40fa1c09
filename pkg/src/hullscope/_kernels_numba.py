"""Numba-compiled twins of the hot kernels in _kernels_numpy.py.

Same contracts, loop-style bodies. nogil lets per-query batch loops run
on a thread pool; no fastmath, so results stay deterministic run to run.
"""

import numpy as np
from numba import njit

BACKEND = "numba"


@njit(cache=True, nogil=True, inline="always")
def _clean_inplace(lam):
    total = 0.0
    for i in range(lam.shape[0]):
        if lam[i] < 0.0:
            lam[i] = 0.0
        total += lam[i]
    for i in range(lam.shape[0]):
        lam[i] /= total


@njit(cache=True, nogil=True, inline="always")
def _refresh_x(P, lam, x):
    n, d = P.shape
    for k in range(d):
        acc = 0.0
        for i in range(n):
            acc += P[i, k] * lam[i]
        x[k] = acc


@njit(cache=True, nogil=True)
def fw_project(points, query, tol, max_iter):
    P = points
    q = query
    n, d = P.shape

    i0 = 0
    best = np.inf
    for i in range(n):
        acc = 0.0
        for k in range(d):
            t = P[i, k] - q[k]
            acc += t * t
        if acc < best:
            best = acc
            i0 = i
    lam = np.zeros(n)
    lam[i0] = 1.0
    x = P[i0].copy()

    g = np.empty(n)
    u = np.empty(d)
    it = 0
    for it in range(1, max_iter + 1):
        glam = 0.0
        gmin = np.inf
        gmax_act = -np.inf
        s = 0
        v = 0
        for i in range(n):
            acc = 0.0
            for k in range(d):
                acc += P[i, k] * (x[k] - q[k])
            g[i] = acc
            glam += acc * lam[i]
            if acc < gmin:
                gmin = acc
                s = i
            if lam[i] > 0.0 and acc > gmax_act:
                gmax_act = acc
                v = i
        gap = glam - gmin
        if gap <= tol:
            # confirm on cleaned coefficients and a drift-free x; if the
            # confirmed gap disagrees, keep iterating from the refreshed
            # point instead of declaring success
            _clean_inplace(lam)
            _refresh_x(P, lam, x)
            glam = 0.0
            gmin = np.inf
            gmax_act = -np.inf
            s = 0
            v = 0
            for i in range(n):
                acc = 0.0
                for k in range(d):
                    acc += P[i, k] * (x[k] - q[k])
                g[i] = acc
                glam += acc * lam[i]
                if acc < gmin:
                    gmin = acc
                    s = i
                if lam[i] > 0.0 and acc > gmax_act:
                    gmax_act = acc
                    v = i
            gap = glam - gmin
            if gap <= tol:
                if gap < 0.0:
                    gap = 0.0
                return lam, gap, it, True

        fw_desc = gmin - glam
        aw_desc = glam - gmax_act

        if fw_desc <= aw_desc:
            denom = 0.0
            rdotu = 0.0
            for k in range(d):
                u[k] = P[s, k] - x[k]
                denom += u[k] * u[k]
                rdotu += (x[k] - q[k]) * u[k]
            if denom <= 1e-300:
                break
            gamma = -rdotu / denom
            if gamma < 0.0:
                gamma = 0.0
            elif gamma > 1.0:
                gamma = 1.0
            for i in range(n):
                lam[i] *= 1.0 - gamma
            lam[s] += gamma
            if gamma == 1.0:
                for k in range(d):
                    x[k] = P[s, k]
            else:
                for k in range(d):
                    x[k] += gamma * u[k]
        else:
            denom = 0.0
            rdotu = 0.0
            for k in range(d):
                u[k] = x[k] - P[v, k]
                denom += u[k] * u[k]
                rdotu += (x[k] - q[k]) * u[k]
            if denom <= 1e-300:
                break
            lam_v = lam[v]
            gmax = lam_v / (1.0 - lam_v) if lam_v < 1.0 else 1e300
            gamma = -rdotu / denom
            if gamma < 0.0:
                gamma = 0.0
            if gamma > gmax:
                gamma = gmax
            for i in range(n):
                lam[i] *= 1.0 + gamma
            lam[v] -= gamma
            if gamma >= gmax:
                lam[v] = 0.0
            for k in range(d):
                x[k] += gamma * u[k]

        if it % 64 == 0:
            _refresh_x(P, lam, x)

    # max_iter exhausted (or a degenerate zero direction): report the
    # cleaned state with its freshly computed gap
    _clean_inplace(lam)
    _refresh_x(P, lam, x)
    glam = 0.0
    gmin = np.inf
    for i in range(n):
        acc = 0.0
        for k in range(d):
            acc += P[i, k] * (x[k] - q[k])
        glam += acc * lam[i]
        if acc < gmin:
            gmin = acc
    gap = glam - gmin
    if gap < 0.0:
        gap = 0.0
    return lam, gap, it, gap <= tol


@njit(cache=True, nogil=True)
def monomial_design(T, exponents):
    N, d = T.shape
    m = exponents.shape[0]
    max_deg = 0
    for j in range(m):
        for k in range(d):
            if exponents[j, k] > max_deg:
                max_deg = exponents[j, k]
    pw = np.ones((max_deg + 1, N, d))
    for e in range(1, max_deg + 1):
        for i in range(N):
            for k in range(d):
                pw[e, i, k] = pw[e - 1, i, k] * T[i, k]
    V = np.ones((N, m))
    for k in range(d):
        for j in range(m):
            e = exponents[j, k]
            if e > 0:
                for i in range(N):
                    V[i, j] *= pw[e, i, k]
    return V
