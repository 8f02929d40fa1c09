"""Command-line interface.

Every subcommand writes a JSON report (to --out or stdout) that embeds
the full effective config under "config", so any report can be replayed
byte-for-byte. Exit codes: 0 success, 1 computation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import boundary, hull, overparam, polyclass, render
from .arrays import (Box, Dataset, gaussian_blobs, labeled_blobs, load_csv,
                     load_matrix, save_csv, xor_dataset)

_STRIPE_CENTERS = [[-1.0, -0.4], [1.0, 1.6], [-1.0, -1.6], [1.0, 0.4]]
_STRIPE_LABELS = [0, 0, 1, 1]


def demo_blobs(seed=1, n_per_class=40):
    """Two 2-D Gaussian blobs used by the bundled demos."""
    return gaussian_blobs(n_per_class, 2, [(-0.6, 0.0), (0.6, 0.0)], 0.15, seed)


def _load_dataset(path, label_col):
    return load_csv(path, label_col)


def _load_points(path, label_col=None):
    """Point matrix from an HSM1 file or the feature columns of a CSV.

    A CSV whose header lacks the label column is read as all-feature rows
    (query files routinely carry no labels).
    """
    if path.endswith(".hsm1"):
        return load_matrix(path)
    name = label_col if label_col is not None else "label"
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    if name in [h.strip() for h in header]:
        return load_csv(path, name).points
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    rows = [[float(c) for c in ln.split(",")] for ln in lines[1:]]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def _load_classifier(path):
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    kind = obj.get("kind")
    if kind == "linear":
        return boundary.LinearClassifier(np.asarray(obj["w"], dtype=float),
                                         float(obj["b"]))
    if kind == "surface":
        surf = polyclass.PolynomialSurface.from_json_dict(obj["surface"])
        return boundary.SurfaceClassifier(surf)
    if kind == "mlp":
        return overparam.Mlp.from_json_dict(obj["model"]).predict
    raise ValueError(f"unknown classifier kind {kind!r} in {path}")


def _write_json(args, report):
    text = json.dumps(report, indent=2, allow_nan=False) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args, keys):
    cfg = {"subcommand": args.subcommand}
    for k in keys:
        cfg[k] = getattr(args, k.replace("-", "_"))
    return cfg


def _render_flag(parser):
    parser.add_argument("--render", default=None, metavar="SVG",
                        help="also write a 2-D SVG render to this path")


# --------------------------------------------------------------------------
# subcommand handlers


def _cmd_gen_data(args):
    if args.kind == "blobs":
        data = gaussian_blobs(args.n, 2, [(-1.0, 0.0), (1.0, 0.0)], args.std,
                              args.seed)
    elif args.kind == "xor":
        data = xor_dataset(args.n, args.noise, args.seed)
    elif args.kind == "stripes":
        data = labeled_blobs(_STRIPE_CENTERS, _STRIPE_LABELS, args.n, args.std,
                             args.seed)
    elif args.kind == "gaussian":
        pts = np.random.default_rng(args.seed).standard_normal((args.n, args.d))
        data = Dataset(pts, np.zeros(args.n, dtype=np.int64))
    else:
        raise ValueError(f"unknown kind {args.kind!r}")
    save_csv(args.out_csv, data, label_column="label")
    if args.render:
        render.render_svg(args.render, points=data.points, labels=data.labels)
    report = {
        "n": data.n, "d": data.d, "classes": data.n_classes,
        "path": args.out_csv,
        "config": _config(args, ["kind", "n", "d", "std", "noise", "seed",
                                 "out-csv", "render"]),
    }
    _write_json(args, report)


def _cmd_hull_check(args):
    train = _load_dataset(args.train, args.label_col)
    queries = _load_points(args.query, args.label_col)
    results = []
    n_in = n_out = n_ind = 0
    for i, q in enumerate(queries):
        status = hull.membership(q, train.points, dist_tol=args.dist_tol)
        if isinstance(status, hull.InHull):
            n_in += 1
            results.append({"index": i, "status": "in_hull",
                            "distance": status.distance})
        elif isinstance(status, hull.OutOfHull):
            n_out += 1
            results.append({
                "index": i, "status": "out_of_hull",
                "distance": status.distance,
                "certificate": {
                    "normal": status.certificate.normal.tolist(),
                    "offset": status.certificate.offset,
                },
            })
        else:
            n_ind += 1
            results.append({"index": i, "status": "indeterminate",
                            "distance": status.distance,
                            "reason": status.reason})
    if args.render:
        render.render_svg(args.render, points=train.points, labels=train.labels,
                          hull_outline=True, extra_points=queries)
    _write_json(args, {
        "results": results, "n_in": n_in, "n_out": n_out,
        "n_indeterminate": n_ind,
        "config": _config(args, ["train", "query", "label-col", "dist-tol",
                                 "render"]),
    })


def _cmd_project(args):
    train = _load_dataset(args.train, args.label_col)
    queries = _load_points(args.query, args.label_col)
    out = []
    for i, q in enumerate(queries):
        p = hull.project_onto_hull(q, train.points, tol=args.gap_tol,
                                   membership_tol=args.dist_tol)
        out.append({
            "index": i,
            "distance": p.distance,
            "dual_gap": p.dual_gap,
            "iterations": p.iterations,
            "converged": p.converged,
            "projection": p.projection.tolist(),
            "coefficients": p.coefficients.tolist(),
            "certificate": None if p.certificate is None else {
                "normal": p.certificate.normal.tolist(),
                "offset": p.certificate.offset,
            },
        })
    _write_json(args, {
        "projections": out,
        "config": _config(args, ["train", "query", "label-col", "gap-tol",
                                 "dist-tol"]),
    })


def _cmd_extrap_report(args):
    train = _load_dataset(args.train, args.label_col)
    test = _load_dataset(args.test, args.label_col)
    rep = hull.extrapolation_report(train, test, dist_tol=args.dist_tol)
    report = rep.to_json_dict()
    report["config"] = _config(args, ["train", "test", "label-col", "dist-tol"])
    _write_json(args, report)


def _fit_xy(data):
    if data.n_classes != 2:
        raise ValueError(f"separator fitting needs 2 classes, got {data.n_classes}")
    return data.by_label(1), data.by_label(0)


def _cmd_fit_poly(args):
    data = _load_dataset(args.train, args.label_col)
    X, Y = _fit_xy(data)
    surface = polyclass.fit_separator(X, Y, args.degree, ridge=args.ridge)
    if surface is None:
        report = {"separator": None, "infeasible": True}
    else:
        report = {
            "separator": surface.to_json_dict(),
            "infeasible": False,
            "functional_margin": polyclass.functional_margin(surface, X, Y),
        }
        if args.render:
            render.render_svg(args.render, points=data.points,
                              labels=data.labels, surface=surface)
    report["config"] = _config(args, ["train", "label-col", "degree", "ridge",
                                      "render"])
    _write_json(args, report)


def _cmd_min_degree(args):
    data = _load_dataset(args.train, args.label_col)
    X, Y = _fit_xy(data)
    found = polyclass.minimal_degree_separator(X, Y, args.degree,
                                               ridge=args.ridge)
    if found is None:
        report = {"min_degree": None, "separator": None}
    else:
        degree, surface = found
        report = {"min_degree": degree, "separator": surface.to_json_dict()}
        if args.render:
            render.render_svg(args.render, points=data.points,
                              labels=data.labels, surface=surface)
    report["config"] = _config(args, ["train", "label-col", "degree", "ridge",
                                      "render"])
    _write_json(args, report)


def _cmd_lemma1_gap(args):
    box = Box(-1.0, 1.0, 1)
    f = polyclass.PolynomialSurface.from_terms({(1,): 1.0}, 1, box)
    samples = np.linspace(-0.5, 0.5, 20)[:, None]
    degrees = list(range(1, args.degree + 1))
    gaps = [
        polyclass.lemma1_gap(f, dh, samples, np.array([args.anchor]), args.delta)
        for dh in degrees
    ]
    _write_json(args, {
        "degrees": degrees,
        "gaps": gaps,
        "config": _config(args, ["degree", "anchor", "delta"]),
    })


def lemma3_demo_setup(seed):
    """Bundled configuration for the extension-family demo."""
    data = demo_blobs(seed)
    box = Box(-3.0, 3.0, 2)
    X, Y = data.by_label(1), data.by_label(0)
    f = polyclass.fit_separator(X, Y, 2, domain=box)
    if f is None:
        raise ValueError("demo blobs unexpectedly inseparable at degree 2")
    rng = np.random.default_rng([seed, 1])
    weights = rng.dirichlet(np.ones(data.n), size=20)
    inside = weights @ data.points
    anchors = np.array([[2.2, 2.2], [-2.2, 2.2]])
    targets = np.array([1.0, -1.0])
    return data, f, inside, anchors, targets


def _cmd_lemma3_demo(args):
    _, f, inside, anchors, targets = lemma3_demo_setup(args.seed)
    family = polyclass.lemma3_extensions(
        f, args.degree_up, args.k, inside, anchors, targets, args.epsilon,
        seed=args.seed,
    )
    inside_certs = []
    for fp in family:
        cert = polyclass.epsilon_equal(f, fp, inside, args.epsilon,
                                       n_samples=args.n_samples, seed=args.seed)
        inside_certs.append(cert.to_json_dict())
    box_region = f.domain
    pairwise = []
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            cert = polyclass.epsilon_equal(family[i], family[j], box_region,
                                           args.epsilon, n_samples=4096,
                                           seed=args.seed)
            pairwise.append({
                "i": i, "j": j,
                "distinct": not cert.equal,
                "witness": None if cert.witness is None else cert.witness.tolist(),
                "max_observed_deviation": cert.max_observed_deviation,
            })
    _write_json(args, {
        "surfaces": [fp.to_json_dict() for fp in family],
        "base_separator": f.to_json_dict(),
        "inside_certificates": inside_certs,
        "pairwise": pairwise,
        "config": _config(args, ["degree-up", "k", "epsilon", "n-samples",
                                 "seed"]),
    })


def _cmd_eps_equal(args):
    with open(args.f, "r", encoding="utf-8") as fh:
        f = polyclass.PolynomialSurface.from_json_dict(json.load(fh))
    with open(args.g, "r", encoding="utf-8") as fh:
        g = polyclass.PolynomialSurface.from_json_dict(json.load(fh))
    if args.points:
        region = _load_points(args.points, args.label_col)
    else:
        region = f.domain
    cert = polyclass.epsilon_equal(f, g, region, args.epsilon,
                                   n_samples=args.n_samples, seed=args.seed)
    report = cert.to_json_dict()
    report["config"] = _config(args, ["f", "g", "points", "label-col",
                                      "epsilon", "n-samples", "seed"])
    _write_json(args, report)


def _parse_vector(text):
    return np.array([float(v) for v in text.split(",")], dtype=float)


def _cmd_boundary_dist(args):
    clf = _load_classifier(args.clf)
    probe = boundary.boundary_distance_along(
        clf, _parse_vector(args.origin), _parse_vector(args.direction),
        args.max_radius, tol=args.tol,
    )
    _write_json(args, {
        "found": probe.found,
        "distance": probe.distance,
        "bracket": [probe.lower, probe.upper],
        "bracket_width": probe.bracket_width,
        "origin_label": probe.origin_label,
        "far_label": probe.far_label,
        "direction": probe.direction.tolist(),
        "config": _config(args, ["clf", "origin", "direction", "max-radius",
                                 "tol"]),
    })


def _cmd_closeness(args):
    clf = _load_classifier(args.clf)
    clean = _load_points(args.clean, args.label_col)
    perturbed = _load_points(args.perturbed, args.label_col)
    rep = boundary.closeness_report(
        clf, clean, perturbed, n_directions=args.n_directions,
        max_radius=args.max_radius, seed=args.seed,
    )
    report = rep.to_json_dict()
    report["config"] = _config(args, ["clf", "clean", "perturbed",
                                      "n-directions", "max-radius", "seed"])
    _write_json(args, report)


def _cmd_lipschitz(args):
    if args.map.endswith(".hsm1"):
        A = load_matrix(args.map)
        map_fn = lambda X: X @ A.T
        dim = A.shape[1]
    else:
        with open(args.map, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        model = overparam.Mlp.from_json_dict(obj["model"] if "model" in obj else obj)
        map_fn = model.features
        dim = model.layer_sizes[0]
    box = Box(args.box_lower, args.box_upper, dim)
    est = boundary.lipschitz_estimate(map_fn, box, args.n_pairs, seed=args.seed)
    _write_json(args, {
        "estimate": est,
        "config": _config(args, ["map", "box-lower", "box-upper", "n-pairs",
                                 "seed"]),
    })


def _cmd_train(args):
    data = _load_dataset(args.train, args.label_col)
    hidden = [int(h) for h in args.hidden.split(",") if h.strip()] if args.hidden else []
    model = overparam.build_mlp(data, hidden, activation=args.activation,
                                seed=args.seed)
    result = overparam.train(model, data, epsilon=args.epsilon,
                             max_epochs=args.max_epochs,
                             n_restarts=args.restarts, seed=args.seed,
                             lr=args.lr, momentum=args.momentum)
    if args.model_out:
        with open(args.model_out, "w", encoding="utf-8") as fh:
            json.dump({"kind": "mlp", "model": model.to_json_dict()}, fh, indent=2)
            fh.write("\n")
    report = result.to_json_dict()
    report["architecture"] = [int(s) for s in model.layer_sizes]
    report["config"] = _config(args, ["train", "label-col", "hidden",
                                      "activation", "epsilon", "max-epochs",
                                      "restarts", "seed", "lr", "momentum",
                                      "model-out"])
    _write_json(args, report)


def _cmd_regime(args):
    data = _load_dataset(args.train, args.label_col)
    hidden = [int(h) for h in args.hidden.split(",") if h.strip()] if args.hidden else []
    cert = overparam.classify_regime(
        hidden, data, epsilon=args.epsilon, elimination_budget=args.budget,
        seed=args.seed, activation=args.activation, max_epochs=args.max_epochs,
        n_restarts=args.restarts, lr=args.lr, momentum=args.momentum,
    )
    report = cert.to_json_dict()
    report["config"] = _config(args, ["train", "label-col", "hidden",
                                      "activation", "epsilon", "budget",
                                      "max-epochs", "restarts", "seed", "lr",
                                      "momentum"])
    _write_json(args, report)


def _cmd_decompose(args):
    clf = _load_classifier(args.model)
    train_set = _load_dataset(args.train, args.label_col)
    test_set = _load_dataset(args.test, args.label_col)
    rep = overparam.decompose_generalization(clf, train_set, test_set,
                                             dist_tol=args.dist_tol)
    report = rep.to_json_dict()
    report["config"] = _config(args, ["model", "train", "test", "label-col",
                                      "dist-tol"])
    _write_json(args, report)


# --------------------------------------------------------------------------
# parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hullscope",
        description="Hull extrapolation geometry, polynomial partitions, "
                    "boundary probes, and regime certificates.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen-data", help="write a synthetic dataset CSV")
    p.add_argument("--kind", required=True,
                   choices=["blobs", "xor", "stripes", "gaussian"])
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--std", type=float, default=0.3)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-csv", required=True)
    _render_flag(p)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("hull-check", help="membership of query points in the "
                                          "training hull")
    p.add_argument("--train", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--dist-tol", type=float, default=1e-6)
    _render_flag(p)
    p.set_defaults(func=_cmd_hull_check)

    p = sub.add_parser("project", help="project query points onto the "
                                       "training hull")
    p.add_argument("--train", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--gap-tol", type=float, default=1e-10)
    p.add_argument("--dist-tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("extrap-report", help="fraction of test points outside "
                                             "the training hull")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--dist-tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_extrap_report)

    p = sub.add_parser("fit-poly", help="fit a polynomial separator "
                                        "(class 1 positive, class 0 negative)")
    p.add_argument("--train", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--ridge", type=float, default=1e-8)
    _render_flag(p)
    p.set_defaults(func=_cmd_fit_poly)

    p = sub.add_parser("min-degree", help="smallest separating degree up to "
                                          "--degree")
    p.add_argument("--train", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--degree", type=int, default=6)
    p.add_argument("--ridge", type=float, default=1e-8)
    _render_flag(p)
    p.set_defaults(func=_cmd_min_degree)

    p = sub.add_parser("lemma1-gap", help="anchored-offset gap curve for the "
                                          "bundled 1-D reference configuration")
    p.add_argument("--degree", type=int, default=10)
    p.add_argument("--anchor", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.set_defaults(func=_cmd_lemma1_gap)

    p = sub.add_parser("lemma3-demo", help="family of same-inside, "
                                           "different-outside extensions on "
                                           "bundled 2-D blobs")
    p.add_argument("--degree-up", type=int, default=6)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--n-samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_lemma3_demo)

    p = sub.add_parser("eps-equal", help="sampled epsilon-equality certificate "
                                         "for two stored surfaces")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--points", default=None,
                   help="hull region points (default: f's domain box)")
    p.add_argument("--label-col", default="label")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n-samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_eps_equal)

    p = sub.add_parser("boundary-dist", help="bisection distance to a label "
                                             "flip along one ray")
    p.add_argument("--clf", required=True)
    p.add_argument("--origin", required=True)
    p.add_argument("--direction", required=True)
    p.add_argument("--max-radius", type=float, default=10.0)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=_cmd_boundary_dist)

    p = sub.add_parser("closeness", help="boundary-distance medians for clean "
                                         "vs perturbed points")
    p.add_argument("--clf", required=True)
    p.add_argument("--clean", required=True)
    p.add_argument("--perturbed", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--n-directions", type=int, default=64)
    p.add_argument("--max-radius", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_closeness)

    p = sub.add_parser("lipschitz", help="empirical Lipschitz lower bound of a "
                                         "stored map")
    p.add_argument("--map", required=True,
                   help="an .hsm1 matrix (linear map) or an MLP JSON "
                        "(last-hidden-layer features)")
    p.add_argument("--box-lower", type=float, default=-1.0)
    p.add_argument("--box-upper", type=float, default=1.0)
    p.add_argument("--n-pairs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_lipschitz)

    p = sub.add_parser("train", help="train a masked MLP classifier")
    p.add_argument("--train", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--hidden", default="",
                   help="comma-separated hidden sizes, empty for linear")
    p.add_argument("--activation", default="tanh", choices=["tanh", "relu"])
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--max-epochs", type=int, default=3000)
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--model-out", default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("regime", help="certify over/perfect/under "
                                      "parameterization")
    p.add_argument("--train", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--hidden", default="")
    p.add_argument("--activation", default="tanh", choices=["tanh", "relu"])
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--budget", type=int, default=8)
    p.add_argument("--max-epochs", type=int, default=3000)
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--momentum", type=float, default=0.9)
    p.set_defaults(func=_cmd_regime)

    p = sub.add_parser("decompose", help="test accuracy split by hull "
                                         "membership")
    p.add_argument("--model", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--label-col", default="label")
    p.add_argument("--dist-tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_decompose)

    for sp in sub.choices.values():
        sp.add_argument("--out", default=None, help="report path (default stdout)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError,
            hull.UnconvergedError) as exc:
        print(f"hullscope: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
