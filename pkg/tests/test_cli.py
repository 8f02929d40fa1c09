import json

import numpy as np
import pytest

from hullscope import cli
from hullscope.arrays import save_matrix


def run_cli(argv):
    return cli.main(argv)


@pytest.fixture()
def workspace(tmp_path):
    """Small input files shared by the subcommand runs."""
    blobs = tmp_path / "blobs.csv"
    stripes = tmp_path / "stripes.csv"
    xor = tmp_path / "xor.csv"
    assert run_cli(["gen-data", "--kind", "blobs", "--n", "12", "--std", "0.3",
                    "--seed", "1", "--out-csv", blobs.as_posix(),
                    "--out", (tmp_path / "g1.json").as_posix()]) == 0
    assert run_cli(["gen-data", "--kind", "stripes", "--n", "8", "--std", "0.2",
                    "--seed", "0", "--out-csv", stripes.as_posix(),
                    "--out", (tmp_path / "g2.json").as_posix()]) == 0
    assert run_cli(["gen-data", "--kind", "xor", "--n", "4", "--noise", "0.1",
                    "--seed", "2", "--out-csv", xor.as_posix(),
                    "--out", (tmp_path / "g3.json").as_posix()]) == 0
    clf = tmp_path / "clf.json"
    clf.write_text(json.dumps({"kind": "linear", "w": [1.0, 0.0], "b": 0.0}))
    mat = tmp_path / "A.hsm1"
    save_matrix(mat.as_posix(), np.array([[2.0, 0.0], [0.0, 1.0]]))
    return tmp_path


def _twice(argv_builder, tmp_path, name, extra_outputs=()):
    """Run one subcommand twice with the identical argv; bytes must match."""
    out = tmp_path / f"{name}_1.json"
    extras = [tmp_path / f"{name}_{e}_1" for e in extra_outputs]
    argv = argv_builder(out, extras)
    assert run_cli(argv) == 0
    first = out.read_bytes()
    first_extras = [e.read_bytes() for e in extras]
    assert run_cli(argv) == 0
    assert out.read_bytes() == first
    for path, blob in zip(extras, first_extras):
        assert path.read_bytes() == blob
    return first


def test_every_subcommand_is_deterministic(workspace):
    tmp = workspace
    blobs = (tmp / "blobs.csv").as_posix()
    stripes = (tmp / "stripes.csv").as_posix()
    xor = (tmp / "xor.csv").as_posix()
    clf = (tmp / "clf.json").as_posix()
    mat = (tmp / "A.hsm1").as_posix()

    _twice(lambda o, ex: ["gen-data", "--kind", "blobs", "--n", "10",
                          "--std", "0.25", "--seed", "3",
                          "--out-csv", ex[0].as_posix(),
                          "--render", ex[1].as_posix(),
                          "--out", o.as_posix()],
           tmp, "gen", extra_outputs=("csv", "svg"))

    _twice(lambda o, ex: ["hull-check", "--train", blobs, "--query", stripes,
                          "--render", ex[0].as_posix(), "--out", o.as_posix()],
           tmp, "hullcheck", extra_outputs=("svg",))

    _twice(lambda o, ex: ["project", "--train", blobs, "--query", stripes,
                          "--out", o.as_posix()], tmp, "project")

    _twice(lambda o, ex: ["extrap-report", "--train", blobs, "--test", stripes,
                          "--out", o.as_posix()], tmp, "extrap")

    _twice(lambda o, ex: ["fit-poly", "--train", blobs, "--degree", "2",
                          "--render", ex[0].as_posix(), "--out", o.as_posix()],
           tmp, "fit", extra_outputs=("svg",))

    _twice(lambda o, ex: ["min-degree", "--train", xor, "--degree", "3",
                          "--out", o.as_posix()], tmp, "mindeg")

    _twice(lambda o, ex: ["lemma1-gap", "--degree", "6",
                          "--out", o.as_posix()], tmp, "l1")

    _twice(lambda o, ex: ["lemma3-demo", "--degree-up", "6", "--k", "3",
                          "--epsilon", "1e-3", "--n-samples", "2000",
                          "--seed", "1", "--out", o.as_posix()], tmp, "l3")

    fit_doc = json.loads((tmp / "fit_1.json").read_text())
    fpath = tmp / "f.json"
    fpath.write_text(json.dumps(fit_doc["separator"]))
    _twice(lambda o, ex: ["eps-equal", "--f", fpath.as_posix(),
                          "--g", fpath.as_posix(), "--epsilon", "1e-4",
                          "--n-samples", "500", "--seed", "0",
                          "--out", o.as_posix()], tmp, "eps")

    _twice(lambda o, ex: ["boundary-dist", "--clf", clf, "--origin=-2,0",
                          "--direction", "1,0", "--max-radius", "8",
                          "--out", o.as_posix()], tmp, "bdist")

    _twice(lambda o, ex: ["closeness", "--clf", clf, "--clean", blobs,
                          "--perturbed", blobs, "--n-directions", "8",
                          "--max-radius", "8", "--seed", "0",
                          "--out", o.as_posix()], tmp, "close")

    _twice(lambda o, ex: ["lipschitz", "--map", mat, "--n-pairs", "200",
                          "--seed", "0", "--out", o.as_posix()], tmp, "lip")

    _twice(lambda o, ex: ["train", "--train", stripes, "--hidden", "",
                          "--max-epochs", "200", "--seed", "0",
                          "--model-out", ex[0].as_posix(),
                          "--out", o.as_posix()],
           tmp, "train", extra_outputs=("model",))

    _twice(lambda o, ex: ["regime", "--train", stripes, "--max-epochs", "400",
                          "--seed", "0", "--out", o.as_posix()], tmp, "regime")

    model = (tmp / "train_model_1").as_posix()
    _twice(lambda o, ex: ["decompose", "--model", model, "--train", stripes,
                          "--test", stripes, "--out", o.as_posix()],
           tmp, "decomp")


def test_unknown_flag_exits_2(workspace, capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["lemma1-gap", "--bogus-flag", "1"])
    assert info.value.code == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == 2


def test_missing_input_exits_1(tmp_path, capsys):
    code = cli.main(["hull-check", "--train", (tmp_path / "no.csv").as_posix(),
                     "--query", (tmp_path / "no.csv").as_posix()])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_report_embeds_config_and_replays(workspace):
    tmp = workspace
    out = tmp / "extrap.json"
    argv = ["extrap-report", "--train", (tmp / "blobs.csv").as_posix(),
            "--test", (tmp / "stripes.csv").as_posix(),
            "--dist-tol", "1e-6", "--out", out.as_posix()]
    assert run_cli(argv) == 0
    doc = json.loads(out.read_text())
    cfg = doc["config"]
    assert cfg["subcommand"] == "extrap-report"
    replay = tmp / "replay.json"
    assert run_cli(["extrap-report", "--train", cfg["train"],
                    "--test", cfg["test"], "--label-col", cfg["label-col"],
                    "--dist-tol", str(cfg["dist-tol"]),
                    "--out", replay.as_posix()]) == 0
    redone = json.loads(replay.read_text())
    assert redone["distances"] == doc["distances"]
    assert redone["fraction_outside"] == doc["fraction_outside"]


def test_render_requires_2d(tmp_path):
    hi = tmp_path / "hi.csv"
    assert run_cli(["gen-data", "--kind", "gaussian", "--n", "10", "--d", "3",
                    "--seed", "0", "--out-csv", hi.as_posix(),
                    "--out", (tmp_path / "g.json").as_posix()]) == 0
    code = cli.main(["gen-data", "--kind", "gaussian", "--n", "10", "--d", "3",
                     "--seed", "0", "--out-csv", hi.as_posix(),
                     "--render", (tmp_path / "x.svg").as_posix(),
                     "--out", (tmp_path / "g2.json").as_posix()])
    assert code == 1


def test_fit_poly_svg_has_contour_and_colors(workspace):
    tmp = workspace
    svg = tmp / "sep.svg"
    assert run_cli(["fit-poly", "--train", (tmp / "xor.csv").as_posix(),
                    "--degree", "2", "--render", svg.as_posix(),
                    "--out", (tmp / "sep.json").as_posix()]) == 0
    text = svg.read_text()
    assert "<path d=" in text  # zero contour traced
    assert "#1f77b4" in text and "#d62728" in text  # two class colors


def test_blobs_only_svg_has_two_colors(workspace):
    tmp = workspace
    svg = tmp / "pts.svg"
    assert run_cli(["gen-data", "--kind", "blobs", "--n", "6", "--std", "0.2",
                    "--seed", "5", "--out-csv", (tmp / "b2.csv").as_posix(),
                    "--render", svg.as_posix(),
                    "--out", (tmp / "b2.json").as_posix()]) == 0
    text = svg.read_text()
    assert "#1f77b4" in text and "#d62728" in text
    assert "<path d=" not in text


def test_lemma3_demo_certificates_pass(workspace):
    tmp = workspace
    out = tmp / "l3full.json"
    assert run_cli(["lemma3-demo", "--degree-up", "6", "--k", "3",
                    "--epsilon", "1e-3", "--n-samples", "2000", "--seed", "1",
                    "--out", out.as_posix()]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["surfaces"]) == 3
    assert all(c["verdict"] == "epsilon_equal" for c in doc["inside_certificates"])
    assert all(p["distinct"] for p in doc["pairwise"])


def test_project_accepts_hsm1_queries(workspace):
    tmp = workspace
    queries = tmp / "q.hsm1"
    save_matrix(queries.as_posix(), np.array([[3.0, 0.0], [0.0, 0.1]]))
    out = tmp / "proj.json"
    assert run_cli(["project", "--train", (tmp / "blobs.csv").as_posix(),
                    "--query", queries.as_posix(),
                    "--out", out.as_posix()]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["projections"]) == 2
    assert doc["projections"][0]["distance"] > 1.0  # (3,0) is far outside
    assert doc["projections"][0]["certificate"] is not None


def test_eps_equal_with_point_region(workspace):
    tmp = workspace
    assert run_cli(["fit-poly", "--train", (tmp / "blobs.csv").as_posix(),
                    "--degree", "1",
                    "--out", (tmp / "f1.json").as_posix()]) == 0
    surf = json.loads((tmp / "f1.json").read_text())["separator"]
    fpath = tmp / "fsurf.json"
    fpath.write_text(json.dumps(surf))
    out = tmp / "ee_pts.json"
    assert run_cli(["eps-equal", "--f", fpath.as_posix(), "--g",
                    fpath.as_posix(), "--points", (tmp / "blobs.csv").as_posix(),
                    "--epsilon", "1e-6", "--n-samples", "200", "--seed", "1",
                    "--out", out.as_posix()]) == 0
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "epsilon_equal"
    assert doc["region"] == {"hull_of_points": 24}  # 12 per class


def test_infeasible_fit_reports_cleanly(workspace):
    tmp = workspace
    out = tmp / "lin_xor.json"
    assert run_cli(["fit-poly", "--train", (tmp / "xor.csv").as_posix(),
                    "--degree", "1", "--out", out.as_posix()]) == 0
    doc = json.loads(out.read_text())
    assert doc["infeasible"] is True and doc["separator"] is None
