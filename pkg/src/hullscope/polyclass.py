"""Polynomial partitioning of hypercube domains.

Surfaces are multivariate polynomials in a complete graded-lexicographic
monomial basis. Coordinates are affinely rescaled to [-1, 1]^d before any
monomial is formed, which keeps Vandermonde systems well conditioned up
to the degrees this module targets (degree <= 10, d <= 6).

The ordering puts all multi-indices of total degree t before those of
total degree t+1, so the basis for degree n is a prefix of the basis for
any larger degree; extending a surface to a higher degree is zero-padding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend, hull
from .arrays import Box


class RankDeficiencyError(ValueError):
    """Unregularized normal system is singular."""


class InfeasibleConstraintError(ValueError):
    """Equality constraints admit no solution."""


class InsufficientDegreeError(ValueError):
    """Requested construction needs a higher polynomial degree."""

    def __init__(self, message, achieved_deviation=None):
        super().__init__(message)
        self.achieved_deviation = achieved_deviation


def multi_index_basis(dim, degree):
    """All exponent vectors with total degree <= degree, graded-lex order.

    Within one total degree the order is plain lexicographic ascending,
    e.g. for d=2, t=2: (0,2), (1,1), (2,0).
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    out = []

    def fill(prefix, remaining, total):
        if remaining == 1:
            out.append(prefix + [total])
            return
        for first in range(total + 1):
            fill(prefix + [first], remaining - 1, total - first)

    for t in range(degree + 1):
        before = len(out)
        fill([], dim, t)
        # lexicographic ascending within the block
        out[before:] = sorted(out[before:])
    return np.array(out, dtype=np.int64)


def basis_size(dim, degree):
    return math.comb(dim + degree, degree)


@dataclass(frozen=True)
class PolynomialSurface:
    """Polynomial over a hypercube, coefficients in scaled-monomial basis."""

    exponents: np.ndarray
    coefficients: np.ndarray
    degree: int
    domain: Box

    def __post_init__(self):
        exps = np.asarray(self.exponents, dtype=np.int64)
        coef = np.asarray(self.coefficients, dtype=np.float64)
        expected = multi_index_basis(self.domain.dim, self.degree)
        if exps.shape != expected.shape or not np.array_equal(exps, expected):
            raise ValueError(
                "exponents must be the complete graded-lex basis for "
                f"(d={self.domain.dim}, degree={self.degree})"
            )
        if coef.shape != (exps.shape[0],):
            raise ValueError(
                f"coefficients must have length {exps.shape[0]}, got {coef.shape}"
            )
        if not np.all(np.isfinite(coef)):
            raise ValueError("coefficients contain non-finite values")
        exps = np.ascontiguousarray(exps)
        coef = np.ascontiguousarray(coef)
        exps.setflags(write=False)
        coef.setflags(write=False)
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "coefficients", coef)

    @classmethod
    def from_coefficients(cls, coefficients, degree, domain):
        return cls(
            exponents=multi_index_basis(domain.dim, degree),
            coefficients=np.asarray(coefficients, dtype=np.float64),
            degree=degree,
            domain=domain,
        )

    @classmethod
    def from_terms(cls, terms, degree, domain):
        """Build from {multi-index tuple: coefficient} in scaled coordinates."""
        exps = multi_index_basis(domain.dim, degree)
        index = {tuple(int(v) for v in e): j for j, e in enumerate(exps)}
        coef = np.zeros(exps.shape[0])
        for alpha, c in terms.items():
            key = tuple(int(v) for v in alpha)
            if key not in index:
                raise ValueError(f"multi-index {key} exceeds degree {degree}")
            coef[index[key]] = c
        return cls(exponents=exps, coefficients=coef, degree=degree, domain=domain)

    @property
    def dim(self):
        return self.domain.dim

    def scale_points(self, X):
        a, b = self.domain.lower, self.domain.upper
        return (2.0 * X - (a + b)) / (b - a)

    def design_matrix(self, X):
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        return _backend.monomial_design(self.scale_points(X), self.exponents)

    def evaluate_many(self, X):
        """Values at the rows of X. Points outside the domain are permitted
        (polynomials extend everywhere); membership can be checked with
        domain.contains."""
        return self.design_matrix(X) @ self.coefficients

    def evaluate(self, x):
        return float(self.evaluate_many(np.asarray(x, dtype=float)[None, :])[0])

    def extended(self, degree):
        """Same polynomial in the basis of a (not lower) degree."""
        if degree < self.degree:
            raise ValueError(f"cannot shrink degree {self.degree} to {degree}")
        if degree == self.degree:
            return self
        coef = np.zeros(basis_size(self.dim, degree))
        coef[: self.coefficients.shape[0]] = self.coefficients
        return PolynomialSurface.from_coefficients(coef, degree, self.domain)

    def _binary(self, other, sign):
        if not isinstance(other, PolynomialSurface):
            return NotImplemented
        if other.domain != self.domain:
            raise ValueError("surfaces live on different domains")
        degree = max(self.degree, other.degree)
        a = self.extended(degree)
        b = other.extended(degree)
        return PolynomialSurface.from_coefficients(
            a.coefficients + sign * b.coefficients, degree, self.domain
        )

    def __add__(self, other):
        return self._binary(other, 1.0)

    def __sub__(self, other):
        return self._binary(other, -1.0)

    def __rmul__(self, scalar):
        return PolynomialSurface.from_coefficients(
            float(scalar) * self.coefficients, self.degree, self.domain
        )

    def to_json_dict(self):
        return {
            "dim": self.dim,
            "degree": self.degree,
            "domain": {"lower": self.domain.lower, "upper": self.domain.upper},
            "multi_indices": [[int(v) for v in row] for row in self.exponents],
            "coefficients": [float(c) for c in self.coefficients],
        }

    @classmethod
    def from_json_dict(cls, obj):
        domain = Box(float(obj["domain"]["lower"]), float(obj["domain"]["upper"]),
                     int(obj["dim"]))
        surface = cls.from_coefficients(
            np.asarray(obj["coefficients"], dtype=np.float64),
            int(obj["degree"]),
            domain,
        )
        stored = np.asarray(obj["multi_indices"], dtype=np.int64)
        if not np.array_equal(stored, surface.exponents):
            raise ValueError("multi_indices are not in graded-lex order")
        return surface


def enclosing_domain(points, pad=0.1):
    """Smallest padded hypercube [a, b]^d around a point cloud."""
    points = np.asarray(points, dtype=float)
    lo = float(points.min())
    hi = float(points.max())
    span = max(hi - lo, 1e-9)
    return Box(lo - pad * span, hi + pad * span, points.shape[1])


def constrained_lstsq(A, y, C, d, rank_tol=1e-10):
    """Minimize ||A x - y|| subject to C x = d (null-space method).

    The constraint rank is cut at rank_tol relative to the largest
    singular value; an inconsistent system raises InfeasibleConstraintError.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    C = np.asarray(C, dtype=float)
    d = np.asarray(d, dtype=float)
    U, S, Vt = np.linalg.svd(C, full_matrices=True)
    if S.size:
        rank = int(np.sum(S > rank_tol * S[0]))
    else:
        rank = 0
    if rank == 0:
        x_p = np.zeros(C.shape[1])
    else:
        x_p = Vt[:rank].T @ ((U[:, :rank].T @ d) / S[:rank])
    if np.linalg.norm(C @ x_p - d) > 1e-8 * (1.0 + np.linalg.norm(d)):
        raise InfeasibleConstraintError("equality constraints are inconsistent")
    Z = Vt[rank:].T
    if Z.shape[1] == 0:
        return x_p
    w, *_ = np.linalg.lstsq(A @ Z, y - A @ x_p, rcond=None)
    return x_p + Z @ w


def _nullspace(M, rank_tol=1e-10):
    _, S, Vt = np.linalg.svd(M, full_matrices=True)
    if S.size:
        rank = int(np.sum(S > rank_tol * S[0]))
    else:
        rank = 0
    return Vt[rank:].T


def fit_separator(X, Y, degree, ridge=1e-8, domain=None):
    """Least-squares polynomial separator: +1 targets on X, -1 on Y.

    Returns the fitted surface, or None when the fit fails to give every
    point the correct strict sign (no separator of this degree found by
    the fit). With ridge=0 a rank-deficient system raises
    RankDeficiencyError instead of silently picking a pseudo-solution.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[0] < 1 or Y.shape[0] < 1:
        raise ValueError("X and Y must both be nonempty")
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    if ridge < 0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")
    if domain is None:
        domain = enclosing_domain(np.vstack([X, Y]))

    surface0 = PolynomialSurface.from_coefficients(
        np.zeros(basis_size(domain.dim, degree)), degree, domain
    )
    V = surface0.design_matrix(np.vstack([X, Y]))
    targets = np.concatenate([np.ones(X.shape[0]), -np.ones(Y.shape[0])])
    m = V.shape[1]
    if ridge > 0:
        coef = np.linalg.solve(V.T @ V + ridge * np.eye(m), V.T @ targets)
    else:
        coef, _, rank, _ = np.linalg.lstsq(V, targets, rcond=None)
        if rank < m:
            raise RankDeficiencyError(
                f"normal system is rank-deficient (rank {rank} < {m}); "
                "set ridge > 0"
            )
    values = V @ coef
    if not (np.all(values[: X.shape[0]] > 0.0) and np.all(values[X.shape[0]:] < 0.0)):
        return None
    return PolynomialSurface.from_coefficients(coef, degree, domain)


def minimal_degree_separator(X, Y, max_degree, ridge=1e-8, domain=None):
    """Smallest degree in 1..max_degree whose fit separates, with witness.

    Returns (degree, surface) or None when no degree works.
    """
    if max_degree < 1:
        raise ValueError(f"max_degree must be >= 1, got {max_degree}")
    for degree in range(1, max_degree + 1):
        surface = fit_separator(X, Y, degree, ridge=ridge, domain=domain)
        if surface is not None:
            return degree, surface
    return None


def functional_margin(f, X, Y):
    """min |f| over X u Y, defined only when f strictly separates them."""
    vx = f.evaluate_many(np.atleast_2d(X))
    vy = f.evaluate_many(np.atleast_2d(Y))
    if not (np.all(vx > 0.0) and np.all(vy < 0.0)):
        raise ValueError("margin undefined for non-separator")
    return float(min(vx.min(), -vy.max()))


def sample_region(region, n_samples, rng):
    """Deterministic samples of a Box or of the hull of a point set.

    For a point set the set's own points come first (hull vertices are in
    the hull), then uniform-weight convex combinations.
    """
    if isinstance(region, Box):
        return region.sample(n_samples, rng)
    pts = np.atleast_2d(np.asarray(region, dtype=float))
    k = pts.shape[0]
    if n_samples <= k:
        return pts[:n_samples].copy()
    weights = rng.dirichlet(np.ones(k), size=n_samples - k)
    return np.vstack([pts, weights @ pts])


@dataclass(frozen=True)
class EpsilonCertificate:
    """Sampled evidence that |f - g| stays below (or reaches) epsilon.

    Sample-based, not a proof: a recorded seed makes it reproducible and
    falsifiable, and a NotEpsilonEqual verdict carries a concrete witness
    point that can be re-checked by evaluation.
    """

    epsilon: float
    region: object
    n_samples: int
    max_observed_deviation: float
    equal: bool
    witness: np.ndarray | None
    seed: int

    @property
    def verdict(self):
        return "epsilon_equal" if self.equal else "not_epsilon_equal"

    def to_json_dict(self):
        if isinstance(self.region, Box):
            region = {"box": {"lower": self.region.lower, "upper": self.region.upper,
                              "dim": self.region.dim}}
        else:
            region = {"hull_of_points": int(np.atleast_2d(self.region).shape[0])}
        return {
            "verdict": self.verdict,
            "epsilon": self.epsilon,
            "region": region,
            "n_samples": self.n_samples,
            "max_observed_deviation": self.max_observed_deviation,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
            "seed": self.seed,
        }


def epsilon_equal(f, g, region, epsilon, n_samples=10_000, seed=0):
    """Certify |f - g| < epsilon over a region by deterministic sampling.

    Scans samples in draw order and stops at the first violation, which
    becomes the witness.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    rng = np.random.default_rng(seed)
    samples = sample_region(region, n_samples, rng)
    devs = np.abs(f.evaluate_many(samples) - g.evaluate_many(samples))
    violations = np.flatnonzero(devs >= epsilon)
    if violations.size:
        first = int(violations[0])
        return EpsilonCertificate(
            epsilon=epsilon,
            region=region,
            n_samples=n_samples,
            max_observed_deviation=float(devs[: first + 1].max()),
            equal=False,
            witness=samples[first].copy(),
            seed=seed,
        )
    return EpsilonCertificate(
        epsilon=epsilon,
        region=region,
        n_samples=n_samples,
        max_observed_deviation=float(devs.max()),
        equal=True,
        witness=None,
        seed=seed,
    )


@dataclass(frozen=True)
class SeparationRecord:
    """Outcome of checking one perturbed separator against the original."""

    index: int
    certificate: EpsilonCertificate
    separates: bool | None
    violation: np.ndarray | None


def lemma2_check(f, g_family, X, Y, epsilon, n_samples=2000, seed=0):
    """Check that every sampled-epsilon-equal g separates X and Y like f.

    Requires epsilon below f's functional margin; a reported violation
    would falsify this implementation, not the underlying claim.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    margin = functional_margin(f, X, Y)
    if not epsilon < margin:
        raise ValueError(
            f"precondition of Lemma 2 violated: epsilon {epsilon} >= margin {margin}"
        )
    region = np.vstack([X, Y])
    records = []
    for i, g in enumerate(g_family):
        cert = epsilon_equal(f, g, region, epsilon, n_samples=n_samples, seed=seed)
        if not cert.equal:
            records.append(SeparationRecord(i, cert, None, None))
            continue
        gx = g.evaluate_many(X)
        gy = g.evaluate_many(Y)
        bad_x = np.flatnonzero(gx <= 0.0)
        bad_y = np.flatnonzero(gy >= 0.0)
        if bad_x.size:
            records.append(SeparationRecord(i, cert, False, X[int(bad_x[0])].copy()))
        elif bad_y.size:
            records.append(SeparationRecord(i, cert, False, Y[int(bad_y[0])].copy()))
        else:
            records.append(SeparationRecord(i, cert, True, None))
    return records


def lemma1_gap(f, degree_h, inside_samples, outside_anchor, delta):
    """Least possible inside-RMS deviation under a forced anchor offset.

    Over all h of degree <= degree_h with h(anchor) = f(anchor) + delta,
    returns the minimum root-mean-square of h - f on the inside samples
    (equality-constrained least squares). Large at low degree, shrinking
    toward zero as degree_h grows past the interpolation threshold.
    """
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    inside = np.atleast_2d(np.asarray(inside_samples, dtype=float))
    anchor = np.asarray(outside_anchor, dtype=float).reshape(1, -1)
    template = PolynomialSurface.from_coefficients(
        np.zeros(basis_size(f.dim, degree_h)), degree_h, f.domain
    )
    A = template.design_matrix(inside)
    y = f.evaluate_many(inside)
    C = template.design_matrix(anchor)
    target = np.array([f.evaluate(anchor[0]) + delta])
    coef = constrained_lstsq(A, y, C, target)
    residual = A @ coef - y
    return float(np.sqrt(np.mean(residual**2)))


def lemma3_extensions(f, degree_up, k, inside_samples, anchors, targets,
                      epsilon, seed=0, distinct_factor=10.0, max_tries=50):
    """Family of k same-inside, different-outside extensions of f.

    Each member f+ = f + D has degree <= degree_up, deviates from f by
    less than epsilon on hull(inside_samples), and hits the prescribed
    deviation target at every anchor exactly (equality constraint). The
    family differs pairwise by at least distinct_factor * epsilon
    somewhere in the domain box. Member 0 uses the minimum-energy D;
    the rest add seeded unit directions from the null space of the
    stacked constraint/objective system, scaled to keep half the inside
    budget in reserve.
    """
    if degree_up <= f.degree:
        raise ValueError(
            f"degree_up must exceed degree(f)={f.degree}, got {degree_up}"
        )
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    inside = np.atleast_2d(np.asarray(inside_samples, dtype=float))
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    targets = np.asarray(targets, dtype=float).reshape(-1)
    if anchors.shape[0] != targets.shape[0]:
        raise ValueError("need one target per anchor")
    if anchors.shape[1] != inside.shape[1]:
        raise ValueError("anchors and inside samples disagree on dimension")
    for a in anchors:
        if hull.distance_to_hull(a, inside) <= 1e-9:
            raise ValueError(
                f"anchor {a.tolist()} lies inside the hull of inside_samples"
            )

    template = PolynomialSurface.from_coefficients(
        np.zeros(basis_size(f.dim, degree_up)), degree_up, f.domain
    )
    A_in = template.design_matrix(inside)
    C = template.design_matrix(anchors)

    base = constrained_lstsq(A_in, np.zeros(inside.shape[0]), C, targets)

    rng = np.random.default_rng([seed, 0])
    hull_probe = sample_region(inside, max(4096, 4 * inside.shape[0]), rng)
    D_hull = template.design_matrix(hull_probe)
    box_probe = f.domain.sample(4096, rng)
    D_box = template.design_matrix(box_probe)

    dev0 = float(np.max(np.abs(D_hull @ base)))
    if dev0 >= epsilon:
        raise InsufficientDegreeError(
            f"degree_up={degree_up} cannot keep the inside deviation below "
            f"epsilon={epsilon}: achieved {dev0:.3e}",
            achieved_deviation=dev0,
        )

    Z = _nullspace(np.vstack([C, A_in]))
    if Z.shape[1] == 0:
        raise InsufficientDegreeError(
            f"degree_up={degree_up} leaves no free directions: the stacked "
            f"constraint system has full column rank {Z.shape[0]}; raise the "
            "degree or use fewer inside samples",
            achieved_deviation=dev0,
        )

    threshold = distinct_factor * epsilon
    budget = 0.5 * (epsilon - dev0)
    members = [base]
    while len(members) < k:
        accepted = False
        for _ in range(max_tries):
            w = rng.standard_normal(Z.shape[1])
            w /= np.linalg.norm(w)
            direction = Z @ w
            m_in = float(np.max(np.abs(D_hull @ direction)))
            if m_in < 1e-300:
                continue
            cand = members[0] + (budget / m_in) * direction
            box_vals = D_box @ cand
            distinct = all(
                float(np.max(np.abs(box_vals - D_box @ m))) >= threshold
                for m in members
            )
            if distinct:
                members.append(cand)
                accepted = True
                break
        if not accepted:
            raise InsufficientDegreeError(
                f"could not find {k} pairwise-distinct extensions at "
                f"distinctness threshold {threshold}: the inside budget "
                f"{budget:.3e} is too small relative to the domain box",
                achieved_deviation=dev0,
            )

    f_up = f.extended(degree_up)
    out = []
    for coef in members:
        anchor_err = float(np.max(np.abs(C @ coef - targets)))
        if anchor_err > 1e-8 * (1.0 + float(np.max(np.abs(targets)))):
            raise InfeasibleConstraintError(
                f"anchor constraints drifted by {anchor_err:.3e} during "
                "family generation"
            )
        out.append(
            PolynomialSurface.from_coefficients(
                f_up.coefficients + coef, degree_up, f.domain
            )
        )
    return out
