import json
import xml.etree.ElementTree as ET

import jsonschema
import numpy as np
import pytest

from aldfit.cli import main
from aldfit.report_schemas import load_schema
from aldfit.tensor_io import read_matrix

from conftest import FIXTURES, matrix_file


def run(args):
    return main([str(a) for a in args])


def run_json(args, capsys):
    code = run(args)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


def synth_file(tmp_path, lam=2.0, kappa=1.5, K=3, D=20000, seed=42, name="s.aldw"):
    path = tmp_path / name
    assert run(
        ["synth", "--lambda", lam, "--kappa", kappa, "--m", 0, "--K", K,
         "--D", D, "--seed", seed, "--out", path]
    ) == 0
    return path


# --- synth --------------------------------------------------------------------


def test_synth_deterministic(tmp_path, capsys):
    a = synth_file(tmp_path, name="a.aldw", D=1000)
    b = synth_file(tmp_path, name="b.aldw", D=1000)
    assert a.read_bytes() == b.read_bytes()


def test_synth_validates_shape(tmp_path):
    assert run(["synth", "--lambda", 2, "--kappa", 1, "--K", 2, "--D", 1,
                "--seed", 0, "--out", tmp_path / "x.aldw"]) == 3
    assert run(["synth", "--lambda", 2, "--kappa", 1, "--K", 0, "--D", 5,
                "--seed", 0, "--out", tmp_path / "x.aldw"]) == 3
    assert run(["synth", "--lambda", -2, "--kappa", 1, "--K", 2, "--D", 5,
                "--seed", 0, "--out", tmp_path / "x.aldw"]) == 3


# --- fit -----------------------------------------------------------------------


def test_fit_recovers_synth_parameters(tmp_path, capsys):
    path = synth_file(tmp_path)
    capsys.readouterr()
    code, report = run_json(["fit", "--input", path], capsys)
    assert code == 0
    assert len(report["classes"]) == 3
    for entry in report["classes"]:
        combined = entry["combined"]
        assert abs(combined["lambda"] - 2.0) / 2.0 < 0.05
        assert abs(combined["kappa"] - 1.5) / 1.5 < 0.05
        for sign in ("positive", "negative"):
            assert entry["branches"][sign]["count"] >= 2


def test_fit_report_to_file_and_digest(tmp_path):
    path = synth_file(tmp_path, D=500)
    out = tmp_path / "report.json"
    assert run(["fit", "--input", path, "--out", out]) == 0
    report = json.loads(out.read_text())
    assert report["input_digest"].startswith("sha256:")
    assert report["matrix_name"].startswith("synth_ald")
    assert report["location_m"] == 0.0


def test_fit_class_filter_out_of_range(tmp_path):
    path = synth_file(tmp_path, K=10, D=100)
    assert run(["fit", "--input", path, "--class", 999]) == 3


def test_fit_missing_input(tmp_path):
    assert run(["fit", "--input", tmp_path / "nope.aldw"]) == 2


def test_fit_malformed_input(tmp_path):
    bad = tmp_path / "bad.aldw"
    bad.write_bytes(b"XXXX not a matrix")
    assert run(["fit", "--input", bad]) == 2


def test_fit_unknown_flag_is_usage_error(tmp_path):
    path = synth_file(tmp_path, D=100)
    assert run(["fit", "--input", path, "--bogus"]) == 3


def test_fit_all_degenerate_classes(tmp_path, capsys):
    path = matrix_file(tmp_path, [[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
    assert run(["fit", "--input", path]) == 4


def test_fit_default_label_filter(tmp_path, capsys):
    values = np.random.default_rng(0).normal(size=(5, 40))
    labels = ["tench", "tricycle", "web site", "whiptail", "goldfish"]
    path = matrix_file(tmp_path, values, labels=labels)
    code, report = run_json(["fit", "--input", path], capsys)
    assert code == 0
    assert [c["class_index"] for c in report["classes"]] == [1, 2, 3]

    code, report = run_json(["fit", "--input", path, "--class", 0], capsys)
    assert [c["class_index"] for c in report["classes"]] == [0]

    code, report = run_json(["fit", "--input", path, "--label", "goldfish"], capsys)
    assert [c["class_index"] for c in report["classes"]] == [4]
    assert report["classes"][0]["label"] == "goldfish"


def test_fit_no_labels_defaults_to_all(tmp_path, capsys):
    path = synth_file(tmp_path, K=4, D=200)
    capsys.readouterr()
    code, report = run_json(["fit", "--input", path], capsys)
    assert [c["class_index"] for c in report["classes"]] == [0, 1, 2, 3]


def test_fit_unknown_label(tmp_path):
    path = synth_file(tmp_path, D=100)
    assert run(["fit", "--input", path, "--label", "zebra"]) == 3


def test_fit_permuted_columns_identical_numbers(tmp_path, capsys):
    rng = np.random.default_rng(3)
    values = rng.normal(size=(4, 257)).astype(np.float32)
    perm = rng.permutation(257)
    a = matrix_file(tmp_path, values, filename="a.aldw")
    b = matrix_file(tmp_path, values[:, perm], filename="b.aldw")
    _, ra = run_json(["fit", "--input", a], capsys)
    _, rb = run_json(["fit", "--input", b], capsys)
    for ea, eb in zip(ra["classes"], rb["classes"]):
        assert ea["branches"] == eb["branches"]
        assert ea["combined"] == eb["combined"]


def test_fit_plot_and_csv(tmp_path):
    path = synth_file(tmp_path, K=2, D=3000)
    svg_path = tmp_path / "fit.svg"
    csv_path = tmp_path / "fit.csv"
    assert run(["fit", "--input", path, "--out", tmp_path / "r.json",
                "--plot", svg_path, "--csv", csv_path]) == 0

    root = ET.parse(svg_path).getroot()  # well-formed XML
    assert root.tag.endswith("svg")
    assert root.attrib["width"] == "800" and root.attrib["height"] == "600"
    svg = svg_path.read_text()
    assert svg.count('class="panel"') == 2
    for sign in ("positive", "negative"):
        assert f'class="pt {sign}"' in svg
        assert f'class="fitline {sign}"' in svg

    lines = csv_path.read_text().splitlines()
    assert lines[0] == "class_index,branch,rank,x,log_abs_value,fitted"
    # every fitted point appears in the csv: both branches of both classes
    assert len(lines) - 1 == 2 * 3000


# --- tree / select -----------------------------------------------------------------


def test_select_small_vector(tmp_path, capsys):
    path = matrix_file(tmp_path, [[3.0, -4.0, 1.0]])
    code, doc = run_json(["select", "--input", path, "--depth", 1], capsys)
    assert code == 0
    sel = doc["selections"][0]
    assert sel["positive_terminal"] == [0, 2]
    assert sel["negative_terminal"] == [1]
    stage_plus = next(s for s in sel["stages"] if s["path"] == "+")
    assert stage_plus["label"] == "+1"
    assert sorted(stage_plus["indices"]) == [0, 2]


def test_selection_schema_round_trip(tmp_path, capsys):
    path = synth_file(tmp_path, K=2, D=300)
    capsys.readouterr()
    code, doc = run_json(["select", "--input", path, "--depth", 3,
                          "--min-leaf", 4], capsys)
    assert code == 0
    assert json.loads(json.dumps(doc)) == doc
    for sel in doc["selections"]:
        assert set(sel) == {
            "class_index", "label", "depth",
            "positive_terminal", "negative_terminal", "stages",
        }
        for st in sel["stages"]:
            assert set(st) == {"path", "label", "indices"}


def test_tree_walk_min_leaf(tmp_path, capsys):
    path = synth_file(tmp_path, K=1, D=512)
    capsys.readouterr()
    code, doc = run_json(["tree", "--input", path, "--depth", 3,
                          "--min-leaf", 4], capsys)
    assert code == 0

    def walk(node):
        yield node
        for child in node["children"] or []:
            yield from walk(child)

    nodes = list(walk(doc["classes"][0]["tree"]))
    for node in nodes:
        if node["children"] is not None and node["path"] != "":
            assert node["size"] >= 4  # only nodes above min_leaf were split
        if node["children"] is not None:
            assert node["pivot"] is not None
    leaves = [n for n in nodes if n["children"] is None]
    assert sum(n["size"] for n in leaves) == 512


def test_tree_flag_validation(tmp_path):
    path = synth_file(tmp_path, K=1, D=64)
    assert run(["tree", "--input", path, "--depth", 0]) == 3
    assert run(["select", "--input", path, "--min-leaf", 1]) == 3


# --- prune ---------------------------------------------------------------------------


def test_prune_residual_inf_identity(tmp_path, capsys):
    path = synth_file(tmp_path, K=2, D=2000)
    out = tmp_path / "pruned.aldw"
    capsys.readouterr()
    assert run(["prune", "--input", path, "--rule", "residual",
                "--threshold", "inf", "--out", out]) == 0
    assert out.read_bytes() == path.read_bytes()


def test_prune_requires_threshold(tmp_path):
    path = synth_file(tmp_path, D=100)
    assert run(["prune", "--input", path, "--rule", "residual",
                "--out", tmp_path / "p.aldw"]) == 3


def test_prune_requires_out(tmp_path):
    path = synth_file(tmp_path, D=100)
    assert run(["prune", "--input", path, "--rule", "residual",
                "--threshold", 3]) == 3


def test_prune_terminal_matches_select(tmp_path, capsys):
    path = synth_file(tmp_path, K=3, D=512)
    capsys.readouterr()
    _, sel_doc = run_json(["select", "--input", path, "--depth", 3,
                           "--min-leaf", 4], capsys)
    out = tmp_path / "pruned.aldw"
    code, prune_doc = run_json(
        ["prune", "--input", path, "--rule", "terminal", "--depth", 3,
         "--min-leaf", 4, "--out", out],
        capsys,
    )
    assert code == 0
    kept = {c["class_index"]: c["kept"] for c in prune_doc["classes"]}
    for sel in sel_doc["selections"]:
        expected = len(sel["positive_terminal"]) + len(sel["negative_terminal"])
        assert kept[sel["class_index"]] == expected

    pruned = read_matrix(out)
    for sel in sel_doc["selections"]:
        row = pruned.values[sel["class_index"]]
        keep = sorted(sel["positive_terminal"] + sel["negative_terminal"])
        dropped = np.setdiff1d(np.arange(512), keep)
        assert not row[dropped].any()


def test_prune_residual_drops_match_report(tmp_path, capsys):
    path = synth_file(tmp_path, K=2, D=4000)
    out = tmp_path / "pruned.aldw"
    capsys.readouterr()
    code, doc = run_json(
        ["prune", "--input", path, "--rule", "residual", "--threshold", 2.5,
         "--out", out],
        capsys,
    )
    assert code == 0
    original = read_matrix(path)
    pruned = read_matrix(out)
    for entry in doc["classes"]:
        row = entry["class_index"]
        dropped = entry["dropped_indices"]
        assert len(dropped) == entry["dropped"]
        assert not pruned.values[row][dropped].any()
        keep = np.setdiff1d(np.arange(4000), dropped)
        assert np.array_equal(pruned.values[row][keep], original.values[row][keep])


def test_prune_residual_all_classes_unfittable(tmp_path):
    path = matrix_file(tmp_path, [[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
    assert run(["prune", "--input", path, "--rule", "residual",
                "--threshold", 3, "--out", tmp_path / "p.aldw"]) == 4


def test_prune_class_restriction(tmp_path, capsys):
    path = synth_file(tmp_path, K=3, D=512)
    out = tmp_path / "pruned.aldw"
    capsys.readouterr()
    code, doc = run_json(
        ["prune", "--input", path, "--rule", "terminal", "--class", 1,
         "--out", out],
        capsys,
    )
    assert code == 0
    assert [c["class_index"] for c in doc["classes"]] == [1]
    original = read_matrix(path)
    pruned = read_matrix(out)
    assert np.array_equal(pruned.values[0], original.values[0])
    assert np.array_equal(pruned.values[2], original.values[2])
    assert not np.array_equal(pruned.values[1], original.values[1])


# --- published schemas ---------------------------------------------------------------


def test_fit_report_validates_against_schema(tmp_path, capsys):
    path = synth_file(tmp_path, K=2, D=500)
    capsys.readouterr()
    _, report = run_json(["fit", "--input", path], capsys)
    jsonschema.validate(report, load_schema("fit_report"))

    # degenerate branches (null entries plus branch_errors) also validate
    mixed = matrix_file(tmp_path, [[1.0, 2.0, 4.0], [0.5, 1.5, 2.5]],
                        filename="onesided.aldw")
    _, report = run_json(["fit", "--input", mixed], capsys)
    assert report["classes"][0]["branches"]["negative"] is None
    jsonschema.validate(report, load_schema("fit_report"))


def test_selection_validates_against_schema(tmp_path, capsys):
    path = synth_file(tmp_path, K=2, D=300)
    capsys.readouterr()
    _, doc = run_json(["select", "--input", path], capsys)
    jsonschema.validate(doc, load_schema("selection"))


def test_prune_report_validates_against_schema(tmp_path, capsys):
    path = synth_file(tmp_path, K=2, D=300)
    capsys.readouterr()
    for flags in (["--rule", "residual", "--threshold", "inf"],
                  ["--rule", "residual", "--threshold", "2.5"],
                  ["--rule", "terminal"]):
        _, doc = run_json(
            ["prune", "--input", path, *flags, "--out", tmp_path / "p.aldw"],
            capsys,
        )
        jsonschema.validate(doc, load_schema("prune_report"))


# --- bundled fixture -------------------------------------------------------------------


def test_fixture_fit_report(tmp_path, capsys):
    code, report = run_json(["fit", "--input", FIXTURES / "digits_head.csv"], capsys)
    assert code == 0
    assert len(report["classes"]) == 10
    for entry in report["classes"]:
        assert entry["label"].startswith("digit-")
        assert 0.0 <= entry["branches"]["positive"]["r_squared"] <= 1.0
        assert entry["combined"] is not None
