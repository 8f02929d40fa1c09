"""Independent oracles used by the test suite.

Each oracle takes a different computational route than the code under
test: exhaustive support enumeration and Lawson-Hanson NNLS instead of
Frank-Wolfe, term-by-term math.pow evaluation instead of the design
matrix kernel, a closed form instead of constrained least squares, LP
feasibility instead of fitted separators, and power iteration for
spectral norms.
"""

import math

import numpy as np
import scipy.optimize

from hullscope.arrays import Box


def exhaustive_projection(points, query):
    """Exact hull projection by enumerating every support subset.

    For each nonempty subset solve the equality-constrained least squares
    (sum of weights = 1), keep feasible candidates (weights >= 0), and
    take the best. Exponential in n; fine for n <= 12.
    """
    P = np.asarray(points, dtype=float)
    q = np.asarray(query, dtype=float)
    n = P.shape[0]
    best = np.inf
    for mask in range(1, 1 << n):
        idx = [i for i in range(n) if mask & (1 << i)]
        A = P[idx].T  # (d, k)
        k = len(idx)
        M = np.zeros((k + 1, k + 1))
        M[:k, :k] = A.T @ A
        M[:k, k] = 1.0
        M[k, :k] = 1.0
        rhs = np.concatenate([A.T @ q, [1.0]])
        sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        lam = sol[:k]
        if abs(lam.sum() - 1.0) > 1e-6:
            continue
        if np.any(lam < -1e-9):
            continue
        lam = np.maximum(lam, 0.0)
        lam /= lam.sum()
        dist = float(np.linalg.norm(A @ lam - q))
        best = min(best, dist)
    return best


def nnls_projection(points, query, rho=1e5):
    """Hull projection via Lawson-Hanson NNLS with a penalty row forcing
    the weights to sum to one; the weights are renormalized afterwards so
    the returned distance is always feasible."""
    P = np.asarray(points, dtype=float)
    q = np.asarray(query, dtype=float)
    A = np.vstack([P.T, rho * np.ones(P.shape[0])])
    b = np.concatenate([q, [rho]])
    lam, _ = scipy.optimize.nnls(A, b)
    total = lam.sum()
    if total <= 0:
        raise RuntimeError("nnls returned an all-zero weight vector")
    lam = lam / total
    return float(np.linalg.norm(P.T @ lam - q))


def linearly_separable(points, labels):
    """LP feasibility: does some (w, b) give every point the right strict
    sign? Any strict separator can be scaled to margin 1, so feasibility
    of w.x + b >= 1 / <= -1 is equivalent."""
    X = np.asarray(points, dtype=float)
    y = np.asarray(labels)
    d = X.shape[1]
    # variables: w (d), b. Constraints as A_ub @ z <= b_ub.
    rows = []
    rhs = []
    for x, lab in zip(X, y):
        if lab == 1:
            rows.append(np.concatenate([-x, [-1.0]]))
            rhs.append(-1.0)
        else:
            rows.append(np.concatenate([x, [1.0]]))
            rhs.append(-1.0)
    res = scipy.optimize.linprog(
        c=np.zeros(d + 1),
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(None, None)] * (d + 1),
        method="highs",
    )
    return res.status == 0


def eval_surface_terms(surface, x):
    """Term-by-term surface evaluation with math.pow, no design matrix."""
    a, b = surface.domain.lower, surface.domain.upper
    t = [(2.0 * xi - (a + b)) / (b - a) for xi in x]
    total = 0.0
    for alpha, c in zip(surface.exponents, surface.coefficients):
        term = c
        for k, e in enumerate(alpha):
            term *= math.pow(t[k], int(e))
        total += term
    return total


def closed_form_line_gap(sample_xs, anchor, delta):
    """Minimum RMS of an affine h minus f(x)=x on samples, with
    h(anchor) = anchor + delta, solved in closed form."""
    x = np.asarray(sample_xs, dtype=float)
    diff = anchor - x
    gamma = -delta * diff.sum() / np.sum(diff**2)
    r = delta + gamma * diff
    return float(np.sqrt(np.mean(r**2)))


def power_iteration_sigma_max(A, iters=500, seed=0):
    """Largest singular value and top right-singular vector of A."""
    A = np.asarray(A, dtype=float)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = A.T @ (A @ v)
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0, v
        v = w / norm
    return float(np.linalg.norm(A @ v)), v


def random_rotation(d, rng):
    """Haar-ish orthogonal matrix via QR of a Gaussian draw."""
    M = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(M)
    return Q * np.sign(np.diag(R))


def unit_box(d):
    return Box(-1.0, 1.0, d)
