"""Black-box decision-boundary geometry.

A classifier here is any callable mapping a batch of points (m, d) to
integer labels (m,); it must be deterministic and defined everywhere.
Probes bracket a label flip by radius doubling and close the bracket by
bisection, so every reported distance comes with a two-sided bracket
that two classifier evaluations can re-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class LinearClassifier:
    """Label 1 where w.x + b > 0, else 0."""

    def __init__(self, w, b):
        self.w = np.asarray(w, dtype=float)
        self.b = float(b)

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return (X @ self.w + self.b > 0.0).astype(np.int64)

    def true_distance(self, x):
        """Exact distance from x to the hyperplane (analytic)."""
        return abs(float(np.asarray(x, dtype=float) @ self.w) + self.b) / float(
            np.linalg.norm(self.w)
        )


class SurfaceClassifier:
    """Label 1 where a polynomial surface is positive, else 0."""

    def __init__(self, surface):
        self.surface = surface

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return (self.surface.evaluate_many(X) > 0.0).astype(np.int64)


@dataclass(frozen=True)
class BoundaryProbe:
    """One directional boundary distance measurement."""

    origin: np.ndarray
    direction: np.ndarray
    found: bool
    distance: float | None
    lower: float
    upper: float
    origin_label: int
    far_label: int | None
    max_radius: float

    @property
    def bracket_width(self):
        return self.upper - self.lower


def _unit(direction):
    direction = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(direction))
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("direction must be nonzero and finite")
    return direction / norm


def probe_directions(clf, origin, directions, max_radius, tol=None):
    """Boundary distance along each (already unit) direction, batched.

    Returns (found, lower, upper, far_label) arrays. Expansion tests
    radii tol * 2^j capped at max_radius; bisection then shrinks each
    bracket to width <= tol. All classifier calls are batched.
    """
    origin = np.asarray(origin, dtype=float)
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    m = dirs.shape[0]
    if not max_radius > 0:
        raise ValueError(f"max_radius must be > 0, got {max_radius}")
    if tol is None:
        tol = 1e-6 * max_radius
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")

    origin_label = int(clf(origin[None, :])[0])

    radii = []
    r = min(tol, max_radius)
    while True:
        radii.append(r)
        if r >= max_radius:
            break
        r = min(2.0 * r, max_radius)

    lo = np.zeros(m)
    hi = np.full(m, np.nan)
    far = np.full(m, -1, dtype=np.int64)
    active = np.ones(m, dtype=bool)
    for r in radii:
        if not active.any():
            break
        pts = origin + r * dirs[active]
        labels = clf(pts)
        flipped = labels != origin_label
        idx = np.flatnonzero(active)
        hit = idx[flipped]
        hi[hit] = r
        far[hit] = labels[flipped]
        lo[idx[~flipped]] = r
        active[hit] = False

    found = ~np.isnan(hi)
    # bisection on the found brackets, batched
    work = np.flatnonzero(found & (hi - lo > tol))
    while work.size:
        mid = 0.5 * (lo[work] + hi[work])
        labels = clf(origin + mid[:, None] * dirs[work])
        flipped = labels != origin_label
        hi[work[flipped]] = mid[flipped]
        far[work[flipped]] = labels[flipped]
        lo[work[~flipped]] = mid[~flipped]
        work = work[(hi[work] - lo[work]) > tol]

    return found, lo, hi, far, origin_label


def boundary_distance_along(clf, origin, direction, max_radius, tol=None):
    """Distance to the nearest label flip along one ray from origin."""
    origin = np.asarray(origin, dtype=float)
    u = _unit(direction)
    if tol is None:
        tol = 1e-6 * max_radius
    found, lo, hi, far, origin_label = probe_directions(
        clf, origin, u[None, :], max_radius, tol
    )
    if not found[0]:
        return BoundaryProbe(
            origin=origin,
            direction=u,
            found=False,
            distance=None,
            lower=float(lo[0]),
            upper=float(max_radius),
            origin_label=origin_label,
            far_label=None,
            max_radius=float(max_radius),
        )
    return BoundaryProbe(
        origin=origin,
        direction=u,
        found=True,
        distance=0.5 * float(lo[0] + hi[0]),
        lower=float(lo[0]),
        upper=float(hi[0]),
        origin_label=origin_label,
        far_label=int(far[0]),
        max_radius=float(max_radius),
    )


def random_unit_directions(n, d, rng):
    """Uniform directions on the sphere via normalized Gaussian draws."""
    dirs = rng.standard_normal((n, d))
    norms = np.linalg.norm(dirs, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return dirs / norms


def nearest_boundary_estimate(clf, origin, n_directions, max_radius, tol=None,
                              seed=0, refine_rounds=0):
    """Upper bound on the distance from origin to the decision boundary.

    Minimum found distance over n seeded random unit directions plus the
    2d coordinate directions. Direction draws are prefix-stable in
    n_directions for a fixed seed, so enlarging the direction set can
    only lower the estimate.

    refine_rounds > 0 adds a seeded hill climb over extra directions
    around the current best (needed for tight bounds in higher
    dimensions, where uniform directions undersample the normal cone);
    every reported value is still a measured distance along a real
    direction, hence still an upper bound. Returns None if no direction
    finds a flip.
    """
    origin = np.asarray(origin, dtype=float)
    d = origin.shape[0]
    if n_directions < 1:
        raise ValueError(f"n_directions must be >= 1, got {n_directions}")
    rng = np.random.default_rng(seed)
    dirs = [random_unit_directions(n_directions, d, rng)]
    eye = np.eye(d)
    dirs.append(eye)
    dirs.append(-eye)
    dirs = np.vstack(dirs)

    found, lo, hi, _, _ = probe_directions(clf, origin, dirs, max_radius, tol)
    if not found.any():
        return None
    mids = 0.5 * (lo + hi)
    best_i = int(np.argmin(np.where(found, mids, np.inf)))
    best_dist = float(mids[best_i])
    best_dir = dirs[best_i]

    step = 0.5
    for _ in range(refine_rounds):
        cands = best_dir + step * random_unit_directions(8, d, rng)
        norms = np.linalg.norm(cands, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        cands /= norms
        found, lo, hi, _, _ = probe_directions(clf, origin, cands, max_radius, tol)
        if found.any():
            mids = 0.5 * (lo + hi)
            j = int(np.argmin(np.where(found, mids, np.inf)))
            if mids[j] < best_dist:
                best_dist = float(mids[j])
                best_dir = cands[j]
        step = max(0.8 * step, 0.02)
    return best_dist


def lipschitz_estimate(map_fn, box, n_pairs, seed=0, extra_pairs=None,
                       perturb_scale=1e-6):
    """Empirical lower bound on the Lipschitz constant of a map over a box.

    Samples n_pairs random point pairs plus n_pairs short perturbation
    pairs (x, x + h) with |h| = perturb_scale * box width; coincident
    pairs are skipped. extra_pairs lets a caller seed known stretch
    directions (e.g. a top singular direction).
    """
    if n_pairs < 1:
        raise ValueError(f"n_pairs must be >= 1, got {n_pairs}")
    rng = np.random.default_rng(seed)
    d = box.dim
    xs = box.sample(n_pairs, rng)
    ys = box.sample(n_pairs, rng)
    h = perturb_scale * box.width * random_unit_directions(n_pairs, d, rng)
    pairs_a = [xs, xs]
    pairs_b = [ys, xs + h]
    if extra_pairs:
        ea = np.atleast_2d(np.asarray([p[0] for p in extra_pairs], dtype=float))
        eb = np.atleast_2d(np.asarray([p[1] for p in extra_pairs], dtype=float))
        pairs_a.append(ea)
        pairs_b.append(eb)
    A = np.vstack(pairs_a)
    B = np.vstack(pairs_b)
    in_dist = np.linalg.norm(A - B, axis=1)
    keep = in_dist > 1e-15
    if not keep.any():
        raise ValueError("all sampled pairs are coincident")
    fa = np.atleast_2d(map_fn(A[keep]))
    fb = np.atleast_2d(map_fn(B[keep]))
    if fa.ndim == 1:
        fa = fa[:, None]
        fb = fb[:, None]
    out_dist = np.linalg.norm(fa - fb, axis=1)
    return float(np.max(out_dist / in_dist[keep]))


@dataclass(frozen=True)
class ClosenessReport:
    """Boundary-distance comparison between clean and perturbed points."""

    clean_distances: list
    perturbed_distances: list
    median_clean: float
    median_perturbed: float
    threshold: float

    def to_json_dict(self):
        return {
            "clean_distances": self.clean_distances,
            "perturbed_distances": self.perturbed_distances,
            "median_clean": self.median_clean,
            "median_perturbed": self.median_perturbed,
            "threshold": self.threshold,
        }


def closeness_report(clf, clean, perturbed, n_directions=64, max_radius=None,
                     tol=None, seed=0, refine_rounds=0):
    """Per-point nearest-boundary estimates for two matched point sets.

    The detection threshold is the midpoint of the two medians. Points
    whose probes all miss are recorded as None and excluded from medians.
    """
    clean = np.atleast_2d(np.asarray(clean, dtype=float))
    perturbed = np.atleast_2d(np.asarray(perturbed, dtype=float))
    if clean.size == 0 or perturbed.size == 0:
        raise ValueError("clean and perturbed sets must be nonempty")
    if clean.shape != perturbed.shape:
        raise ValueError(
            f"clean and perturbed disagree on shape: {clean.shape} vs {perturbed.shape}"
        )
    if max_radius is None:
        span = float(np.max(np.vstack([clean, perturbed])) -
                     np.min(np.vstack([clean, perturbed])))
        max_radius = max(2.0 * span, 1.0)

    def estimates(points):
        vals = []
        for x in points:
            vals.append(
                nearest_boundary_estimate(
                    clf, x, n_directions, max_radius, tol=tol, seed=seed,
                    refine_rounds=refine_rounds,
                )
            )
        return vals

    clean_d = estimates(clean)
    pert_d = estimates(perturbed)
    clean_found = [v for v in clean_d if v is not None]
    pert_found = [v for v in pert_d if v is not None]
    if not clean_found or not pert_found:
        raise ValueError("no boundary found from any probe; raise max_radius")
    med_c = float(np.median(clean_found))
    med_p = float(np.median(pert_found))
    return ClosenessReport(
        clean_distances=[None if v is None else float(v) for v in clean_d],
        perturbed_distances=[None if v is None else float(v) for v in pert_d],
        median_clean=med_c,
        median_perturbed=med_p,
        threshold=0.5 * (med_c + med_p),
    )
