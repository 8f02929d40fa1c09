import math

import numpy as np
import pytest

from hullscope import polyclass as pc
from hullscope.arrays import Box, gaussian_blobs, xor_dataset
from oracles import closed_form_line_gap, eval_surface_terms, linearly_separable

UNIT2 = Box(-1.0, 1.0, 2)


def _surface(terms, degree, domain=UNIT2):
    return pc.PolynomialSurface.from_terms(terms, degree, domain)


def test_basis_size_matches_binomial():
    for d in range(1, 5):
        for n in range(0, 11):
            basis = pc.multi_index_basis(d, n)
            assert basis.shape == (math.comb(d + n, n), d)
            assert basis.shape[0] == pc.basis_size(d, n)


def test_basis_is_graded_prefix():
    small = pc.multi_index_basis(3, 4)
    big = pc.multi_index_basis(3, 7)
    assert np.array_equal(big[: small.shape[0]], small)
    totals = big.sum(axis=1)
    assert np.all(np.diff(totals) >= 0)


def test_eval_constant():
    f = _surface({(0, 0): 4.25}, 2)
    for x in ([0.0, 0.0], [0.3, -0.7], [5.0, 5.0]):
        assert f.evaluate(x) == 4.25


def test_eval_hand_case():
    f = _surface({(2, 0): 1.0, (0, 1): -1.0}, 2)
    assert f.evaluate([2.0, 1.0]) == pytest.approx(3.0, abs=1e-12)


def test_eval_matches_term_oracle():
    rng = np.random.default_rng(8)
    dom = Box(-2.0, 3.0, 2)
    f = pc.PolynomialSurface.from_coefficients(
        rng.standard_normal(pc.basis_size(2, 3)), 3, dom
    )
    for _ in range(10):
        x = rng.uniform(-2.0, 3.0, size=2)
        assert f.evaluate(x) == pytest.approx(eval_surface_terms(f, x), abs=1e-12)


def test_eval_linear_in_coefficients():
    rng = np.random.default_rng(9)
    m = pc.basis_size(2, 4)
    cf = rng.standard_normal(m)
    cg = rng.standard_normal(m)
    f = pc.PolynomialSurface.from_coefficients(cf, 4, UNIT2)
    g = pc.PolynomialSurface.from_coefficients(cg, 4, UNIT2)
    combo = pc.PolynomialSurface.from_coefficients(2.5 * cf - 0.75 * cg, 4, UNIT2)
    for _ in range(10):
        x = rng.uniform(-1, 1, size=2)
        assert combo.evaluate(x) == pytest.approx(
            2.5 * f.evaluate(x) - 0.75 * g.evaluate(x), abs=1e-10
        )


def test_surface_json_roundtrip():
    f = _surface({(2, 0): 1.0, (1, 1): -0.25}, 3, Box(-2.0, 2.0, 2))
    doc = f.to_json_dict()
    assert set(doc) == {"dim", "degree", "domain", "multi_indices", "coefficients"}
    back = pc.PolynomialSurface.from_json_dict(doc)
    assert np.array_equal(back.coefficients, f.coefficients)
    doc["multi_indices"][0], doc["multi_indices"][1] = (
        doc["multi_indices"][1], doc["multi_indices"][0])
    with pytest.raises(ValueError, match="graded-lex"):
        pc.PolynomialSurface.from_json_dict(doc)


def test_fit_two_points_linear():
    f = pc.fit_separator(np.array([[0.0, 0.0]]), np.array([[1.0, 1.0]]), 1)
    assert f is not None
    assert f.evaluate([0.0, 0.0]) > 0.0 > f.evaluate([1.0, 1.0])


def test_fit_xor_degree1_infeasible():
    ds = xor_dataset(1, 0.0, seed=0)
    X, Y = ds.by_label(1), ds.by_label(0)
    assert pc.fit_separator(X, Y, 1) is None
    # independent proof that no linear separator exists at all
    assert not linearly_separable(ds.points, ds.labels)


def test_fit_xor_degree2_separates():
    ds = xor_dataset(1, 0.0, seed=0)
    X, Y = ds.by_label(1), ds.by_label(0)
    f = pc.fit_separator(X, Y, 2)
    assert f is not None
    assert np.all(f.evaluate_many(X) > 0.0)
    assert np.all(f.evaluate_many(Y) < 0.0)


def test_fit_rank_deficient_without_ridge():
    ds = xor_dataset(1, 0.0, seed=0)
    X, Y = ds.by_label(1), ds.by_label(0)
    with pytest.raises(pc.RankDeficiencyError, match="ridge"):
        pc.fit_separator(X, Y, 2, ridge=0.0)


def test_minimal_degree_blobs_is_one():
    ds = gaussian_blobs(15, 2, [(-1.0, 0.0), (1.0, 0.0)], 0.2, seed=3)
    found = pc.minimal_degree_separator(ds.by_label(1), ds.by_label(0), 4)
    assert found is not None and found[0] == 1


def test_minimal_degree_xor_is_two():
    ds = xor_dataset(3, 0.05, seed=2)
    found = pc.minimal_degree_separator(ds.by_label(1), ds.by_label(0), 4)
    assert found is not None and found[0] == 2


def test_minimal_degree_overlapping_classes_not_found():
    pts = np.array([[0.2, 0.1], [-0.4, 0.3]])
    assert pc.minimal_degree_separator(pts, pts, 5) is None


def test_functional_margin_hand_case():
    f = pc.PolynomialSurface.from_terms({(1,): 1.0}, 1, Box(-1.0, 1.0, 1))
    assert pc.functional_margin(f, np.array([[2.0]]), np.array([[-3.0]])) == \
        pytest.approx(2.0, abs=1e-12)


def test_functional_margin_scales_linearly():
    f = _surface({(1, 0): 1.0, (0, 1): 0.5}, 1)
    X = np.array([[0.5, 0.5], [0.9, 0.1]])
    Y = np.array([[-0.5, -0.5]])
    assert pc.functional_margin(10.0 * f, X, Y) == pytest.approx(
        10.0 * pc.functional_margin(f, X, Y), rel=1e-12
    )


def test_functional_margin_matches_enumeration():
    rng = np.random.default_rng(4)
    for _ in range(10):
        w = rng.standard_normal(2)
        b = rng.uniform(-0.2, 0.2)
        f = _surface({(0, 0): b, (0, 1): w[1], (1, 0): w[0]}, 1)
        pts = rng.uniform(-1, 1, size=(30, 2))
        vals = f.evaluate_many(pts)
        keep = np.abs(vals) > 0.05
        pts, vals = pts[keep], vals[keep]
        if not ((vals > 0).any() and (vals < 0).any()):
            continue
        X, Y = pts[vals > 0], pts[vals < 0]
        assert pc.functional_margin(f, X, Y) == pytest.approx(
            float(np.min(np.abs(vals))), rel=1e-12
        )


def test_functional_margin_requires_separator():
    f = _surface({(1, 0): 1.0}, 1)
    with pytest.raises(ValueError, match="margin undefined"):
        pc.functional_margin(f, np.array([[1.0, 0.0], [-1.0, 0.0]]),
                             np.array([[-0.5, 0.0]]))


def test_epsilon_equal_identical():
    f = _surface({(2, 0): 1.0}, 2)
    cert = pc.epsilon_equal(f, f, UNIT2, 1e-6, n_samples=500, seed=0)
    assert cert.equal and cert.max_observed_deviation == 0.0


def test_epsilon_equal_constant_shift():
    eps = 1e-3
    f = _surface({(2, 0): 1.0}, 2)
    g = f + _surface({(0, 0): 2 * eps}, 2)
    cert = pc.epsilon_equal(f, g, UNIT2, eps, n_samples=500, seed=0)
    assert not cert.equal
    assert cert.witness is not None
    # witness is re-checkable by evaluation
    assert abs(f.evaluate(cert.witness) - g.evaluate(cert.witness)) >= eps


def test_epsilon_equal_hull_region_includes_vertices():
    f = _surface({(1, 0): 1.0}, 1)
    g = f + _surface({(0, 0): 0.5}, 1)
    region = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    cert = pc.epsilon_equal(f, g, region, 0.4, n_samples=3, seed=0)
    assert not cert.equal


def test_lemma2_identity_and_shift():
    ds = gaussian_blobs(10, 2, [(1.0, 0.0), (-1.0, 0.0)], 0.2, seed=6)
    X, Y = ds.by_label(0), ds.by_label(1)
    f = pc.fit_separator(X, Y, 1)
    margin = pc.functional_margin(f, X, Y)
    shift = _surface({(0, 0): margin / 2}, 1, f.domain)
    records = pc.lemma2_check(f, [f, f + shift, f - shift], X, Y,
                              0.9 * margin, n_samples=300, seed=0)
    for rec in records:
        assert rec.certificate.equal
        assert rec.separates is True


def test_lemma2_precondition():
    ds = gaussian_blobs(10, 2, [(1.0, 0.0), (-1.0, 0.0)], 0.2, seed=6)
    X, Y = ds.by_label(0), ds.by_label(1)
    f = pc.fit_separator(X, Y, 1)
    margin = pc.functional_margin(f, X, Y)
    with pytest.raises(ValueError, match="precondition of Lemma 2"):
        pc.lemma2_check(f, [f], X, Y, margin * 1.5)


def test_lemma2_random_perturbation_property():
    rng = np.random.default_rng(12)
    violations = 0
    for _ in range(20):
        pts = rng.uniform(-1, 1, size=(16, 2))
        w = rng.standard_normal(2)
        w /= np.linalg.norm(w)
        vals = pts @ w
        keep = np.abs(vals) > 0.1
        if keep.sum() < 4 or not ((vals[keep] > 0).any() and (vals[keep] < 0).any()):
            continue
        X, Y = pts[keep][vals[keep] > 0], pts[keep][vals[keep] < 0]
        f = pc.fit_separator(X, Y, 1, ridge=1e-10)
        if f is None:
            continue
        margin = pc.functional_margin(f, X, Y)
        eps = 0.9 * margin
        gs = []
        for j in range(20):
            noise = rng.standard_normal(f.coefficients.shape[0])
            g = f + pc.PolynomialSurface.from_coefficients(
                0.2 * eps * noise / np.linalg.norm(noise), f.degree, f.domain)
            gs.append(g)
        for rec in pc.lemma2_check(f, gs, X, Y, eps, n_samples=100, seed=1):
            if rec.certificate.equal and rec.separates is not True:
                violations += 1
    assert violations == 0


def _line_f():
    return pc.PolynomialSurface.from_terms({(1,): 1.0}, 1, Box(-1.0, 1.0, 1))


def test_lemma1_gap_matches_closed_form():
    f = _line_f()
    samples = np.linspace(-0.5, 0.5, 20)[:, None]
    gap = pc.lemma1_gap(f, 1, samples, np.array([1.0]), 1.0)
    assert gap == pytest.approx(closed_form_line_gap(samples[:, 0], 1.0, 1.0),
                                abs=1e-9)


def test_lemma1_gap_nonincreasing():
    f = _line_f()
    samples = np.linspace(-0.5, 0.5, 20)[:, None]
    gaps = [pc.lemma1_gap(f, dh, samples, np.array([1.0]), 1.0)
            for dh in range(1, 11)]
    for a, b in zip(gaps, gaps[1:]):
        assert b <= a + 1e-10


def test_lemma1_gap_interpolation_regime():
    f = _line_f()
    samples = np.linspace(-0.5, 0.5, 5)[:, None]
    assert pc.lemma1_gap(f, 12, samples, np.array([1.0]), 1.0) <= 1e-8


def test_lemma1_gap_requires_positive_delta():
    with pytest.raises(ValueError, match="delta"):
        pc.lemma1_gap(_line_f(), 2, np.zeros((3, 1)), np.array([1.0]), 0.0)


def test_lemma3_one_dimensional_construction():
    f = _line_f()
    inside = np.linspace(-0.1, 0.1, 7)[:, None]
    family = pc.lemma3_extensions(f, 8, 2, inside, np.array([[0.9]]),
                                  np.array([1.0]), 1e-3, seed=0)
    assert len(family) == 2
    grid = np.linspace(-0.1, 0.1, 2000)[:, None]
    for fp in family:
        assert np.max(np.abs(fp.evaluate_many(grid) - f.evaluate_many(grid))) < 1e-3
        assert abs(fp.evaluate([0.9]) - f.evaluate([0.9]) - 1.0) <= 1e-6
    box_grid = np.linspace(-1.0, 1.0, 2000)[:, None]
    pair_dev = np.max(np.abs(family[0].evaluate_many(box_grid)
                             - family[1].evaluate_many(box_grid)))
    assert pair_dev >= 10 * 1e-3


def test_lemma3_zero_targets_returns_base_member():
    f = _line_f()
    inside = np.linspace(-0.1, 0.1, 7)[:, None]
    family = pc.lemma3_extensions(f, 8, 2, inside, np.array([[0.9]]),
                                  np.array([0.0]), 1e-3, seed=0)
    assert np.allclose(family[0].coefficients, f.extended(8).coefficients,
                       atol=1e-12)


def test_lemma3_certified_post_hoc_2d():
    from hullscope.cli import lemma3_demo_setup
    _, f, inside, anchors, targets = lemma3_demo_setup(seed=1)
    family = pc.lemma3_extensions(f, 6, 4, inside, anchors, targets, 1e-3,
                                  seed=1)
    for fp in family:
        cert = pc.epsilon_equal(f, fp, inside, 1e-3, n_samples=2000, seed=1)
        assert cert.equal
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            cert = pc.epsilon_equal(family[i], family[j], f.domain, 1e-3,
                                    n_samples=2000, seed=1)
            assert not cert.equal
            assert cert.max_observed_deviation >= 10 * 1e-3


def test_lemma3_rejects_interior_anchor():
    f = _line_f()
    inside = np.linspace(-0.5, 0.5, 7)[:, None]
    with pytest.raises(ValueError, match="inside the hull"):
        pc.lemma3_extensions(f, 8, 2, inside, np.array([[0.0]]),
                             np.array([1.0]), 1e-3, seed=0)


def test_lemma3_insufficient_degree_reported():
    f = _line_f()
    inside = np.linspace(-0.4, 0.4, 9)[:, None]
    with pytest.raises(pc.InsufficientDegreeError) as info:
        pc.lemma3_extensions(f, 2, 2, inside, np.array([[0.9]]),
                             np.array([2.0]), 1e-3, seed=0)
    assert info.value.achieved_deviation is None or \
        info.value.achieved_deviation >= 1e-3


def test_constrained_lstsq_infeasible():
    # contradictory constraints: x = 0 and x = 1
    with pytest.raises(pc.InfeasibleConstraintError):
        pc.constrained_lstsq(np.eye(1), np.zeros(1),
                             np.array([[1.0], [1.0]]), np.array([0.0, 1.0]))
