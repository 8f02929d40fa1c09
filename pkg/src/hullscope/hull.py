"""Convex-hull projection, membership certificates, and extrapolation reports.

The hull is kept in V-representation (its generating points). Projection
solves min ||P^T lam - q||^2 over the probability simplex with away-step
Frank-Wolfe and exact line search; the gradient at an exterior optimum
yields a separating hyperplane for free.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .arrays import Dataset

DEFAULT_GAP_TOL = 1e-10
DEFAULT_DIST_TOL = 1e-6


class UnconvergedError(RuntimeError):
    """Solver stopped at max_iter with dual gap above tolerance."""

    def __init__(self, dual_gap, tol, iterations):
        self.dual_gap = dual_gap
        self.tol = tol
        self.iterations = iterations
        super().__init__(
            f"projection unconverged: dual gap {dual_gap:.3e} > tol {tol:.3e} "
            f"after {iterations} iterations"
        )


@dataclass(frozen=True)
class Hyperplane:
    """Separator w.x = offset with the query strictly on the positive side."""

    normal: np.ndarray
    offset: float

    def verify(self, query, points, tol=0.0):
        """True iff w.q - c > 0 and w.v_i - c <= tol for every hull point."""
        side_q = float(self.normal @ np.asarray(query, dtype=float)) - self.offset
        sides_p = points @ self.normal - self.offset
        return side_q > 0.0 and bool(np.all(sides_p <= tol))


@dataclass(frozen=True)
class HullProjection:
    """Projection of a query point onto the hull of a point set."""

    coefficients: np.ndarray
    projection: np.ndarray
    distance: float
    dual_gap: float
    iterations: int
    converged: bool
    certificate: Hyperplane | None


@dataclass(frozen=True)
class InHull:
    distance: float
    projection: HullProjection


@dataclass(frozen=True)
class OutOfHull:
    distance: float
    certificate: Hyperplane
    projection: HullProjection


@dataclass(frozen=True)
class Indeterminate:
    """Membership could not be certified either way."""

    distance: float
    dual_gap: float
    reason: str
    projection: HullProjection


def _as_points(points):
    P = np.ascontiguousarray(points, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] < 1:
        raise ValueError(f"points must be (n>=1, d), got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ValueError("points contain non-finite values")
    return P


def project_onto_hull(query, points, tol=DEFAULT_GAP_TOL, max_iter=None,
                      membership_tol=DEFAULT_DIST_TOL):
    """Project `query` onto hull(points).

    Runs away-step Frank-Wolfe until the dual gap drops to `tol` or
    `max_iter` (default 50*n) is exhausted; an unconverged solve is
    returned with converged=False, never passed off as a solution.
    A separating-hyperplane certificate is attached when the distance
    exceeds `membership_tol` and the hyperplane actually verifies.
    """
    P = _as_points(points)
    q = np.ascontiguousarray(query, dtype=np.float64)
    if q.shape != (P.shape[1],):
        raise ValueError(f"query shape {q.shape} does not match d={P.shape[1]}")
    if not np.all(np.isfinite(q)):
        raise ValueError("query contains non-finite values")
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if max_iter is None:
        max_iter = 50 * P.shape[0]

    lam, gap, iters, converged = _backend.fw_project(P, q, float(tol), int(max_iter))
    x = P.T @ lam
    dist = float(np.linalg.norm(x - q))

    certificate = None
    if dist > membership_tol:
        normal = (q - x) / dist
        offset = float(np.max(P @ normal))
        cert = Hyperplane(normal=normal, offset=offset)
        if cert.verify(q, P):
            certificate = cert

    return HullProjection(
        coefficients=lam,
        projection=x,
        distance=dist,
        dual_gap=float(gap),
        iterations=int(iters),
        converged=bool(converged),
        certificate=certificate,
    )


def distance_to_hull(query, points, tol=DEFAULT_GAP_TOL, max_iter=None):
    """Euclidean distance from query to hull(points).

    Raises UnconvergedError instead of returning a best-effort number.
    """
    proj = project_onto_hull(query, points, tol=tol, max_iter=max_iter)
    if not proj.converged:
        raise UnconvergedError(proj.dual_gap, tol, proj.iterations)
    return proj.distance


def membership(query, points, dist_tol=DEFAULT_DIST_TOL, tol=None, max_iter=None):
    """Classify query as InHull, OutOfHull (with certificate), or Indeterminate.

    The solver gap tolerance defaults to dist_tol^2 / 10, the accuracy a
    decision right at the threshold requires. Both positive verdicts are
    certifiable independently of the solver run: the computed distance is
    an upper bound on the true distance (any feasible coefficients are),
    so distance <= dist_tol proves InHull; a verified hyperplane proves
    strict exteriority. OutOfHull additionally requires the dual gap to
    be small against distance^2 so the reported distance itself is
    trustworthy (relative error below ~11%). Everything else surfaces as
    Indeterminate rather than a best-effort answer.
    """
    if not dist_tol > 0:
        raise ValueError(f"dist_tol must be > 0, got {dist_tol}")
    if tol is None:
        tol = dist_tol * dist_tol / 10.0
    proj = project_onto_hull(query, points, tol=tol, max_iter=max_iter,
                             membership_tol=dist_tol)
    if proj.distance <= dist_tol:
        return InHull(distance=proj.distance, projection=proj)
    distance_trusted = proj.converged or \
        proj.dual_gap <= proj.distance * proj.distance / 10.0
    if proj.certificate is not None and distance_trusted:
        return OutOfHull(
            distance=proj.distance,
            certificate=proj.certificate,
            projection=proj,
        )
    reason = ("separating hyperplane failed verification"
              if distance_trusted else "solver did not reach gap tolerance")
    return Indeterminate(
        distance=proj.distance,
        dual_gap=proj.dual_gap,
        reason=reason,
        projection=proj,
    )


@dataclass(frozen=True)
class ExtrapolationReport:
    """How much of a test set falls outside the training hull."""

    n_test: int
    n_outside: int
    fraction_outside: float
    distances: np.ndarray
    dist_tol: float

    @property
    def stats(self):
        return {
            "min": float(np.min(self.distances)),
            "median": float(np.median(self.distances)),
            "max": float(np.max(self.distances)),
        }

    def to_json_dict(self):
        return {
            "n_test": self.n_test,
            "n_outside": self.n_outside,
            "fraction_outside": self.fraction_outside,
            "distances": [float(v) for v in self.distances],
            "stats": self.stats,
        }


def hull_distances(queries, points, tol=DEFAULT_GAP_TOL, max_iter=None):
    """Distances from each query row to hull(points); order-stable, parallel.

    Per-query solves are pure and independent; a thread pool sized by
    HULLSCOPE_THREADS does the fan-out and results are merged by index.
    The iteration budget defaults to max(50*n, 20000): near-degenerate
    queries (on or just inside a face) can need far more than 50*n
    away-step iterations, and a batch report should not abort on them.
    """
    Q = _as_points(queries)
    P = _as_points(points)
    if max_iter is None:
        max_iter = max(50 * P.shape[0], 20_000)
    if Q.shape[1] != P.shape[1]:
        raise ValueError(
            f"dimension mismatch: queries are {Q.shape[1]}-D, points {P.shape[1]}-D"
        )

    def solve(i):
        return distance_to_hull(Q[i], P, tol=tol, max_iter=max_iter)

    workers = _backend.thread_count()
    if workers <= 1 or Q.shape[0] == 1:
        return np.array([solve(i) for i in range(Q.shape[0])])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(solve, range(Q.shape[0]))))


def extrapolation_report(train, test, dist_tol=DEFAULT_DIST_TOL,
                         tol=DEFAULT_GAP_TOL, max_iter=None):
    """Per-test-point hull distances plus the outside fraction."""
    train_pts = train.points if isinstance(train, Dataset) else _as_points(train)
    test_pts = test.points if isinstance(test, Dataset) else _as_points(test)
    if train_pts.shape[1] != test_pts.shape[1]:
        raise ValueError(
            f"dimension mismatch: train is {train_pts.shape[1]}-D, "
            f"test {test_pts.shape[1]}-D"
        )
    dists = hull_distances(test_pts, train_pts, tol=tol, max_iter=max_iter)
    n_test = test_pts.shape[0]
    n_outside = int(np.sum(dists > dist_tol))
    return ExtrapolationReport(
        n_test=n_test,
        n_outside=n_outside,
        fraction_outside=n_outside / n_test,
        distances=dists,
        dist_tol=dist_tol,
    )
