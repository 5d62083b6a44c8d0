import json

from ald_extractor.cli import main


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


def test_export_command(tmp_path, capsys):
    out = tmp_path / "head.aldw"
    code, manifest = run(["export", "--model", "resnet18", "--out", out], capsys)
    assert code == 0
    assert manifest["num_classes"] == 1000
    assert manifest["num_features"] == 512
    assert out.exists()


def test_export_unknown_model_is_usage_error(tmp_path, capsys):
    code = main(["export", "--model", "vgg-zillion", "--out", str(tmp_path / "x")])
    assert code == 2  # argparse rejects values outside the registry choices


def test_saliency_command(resnet18_head, image_dir, tmp_path, capsys):
    from conftest import run_aldfit

    head_path, _ = resnet18_head
    sel = tmp_path / "sel.json"
    assert run_aldfit(
        ["select", "--input", head_path, "--class", "424", "--out", sel]
    ).returncode == 0

    out_dir = tmp_path / "maps"
    code, doc = run(
        ["saliency", "--model", "resnet18", "--selection", sel,
         "--images", image_dir, "--target", "barbershop", "--out", out_dir,
         "--stages", "terminals", "--samples", "2"],
        capsys,
    )
    assert code == 0
    assert len(doc["written"]) == 4  # 2 images x 2 terminal maps
    assert all("class424" in name for name in doc["written"])


def test_saliency_bad_target(resnet18_head, image_dir, tmp_path, capsys):
    head_path, _ = resnet18_head
    sel = tmp_path / "sel.json"
    sel.write_text(json.dumps({
        "class_index": 1, "label": None, "depth": 1,
        "positive_terminal": [0], "negative_terminal": [], "stages": [],
    }))
    code = main(
        ["saliency", "--model", "resnet18", "--selection", str(sel),
         "--images", str(image_dir), "--target", "not-a-class",
         "--out", str(tmp_path / "maps")]
    )
    assert code == 1


def test_eval_command(resnet18_head, labeled_image_dir, capsys):
    head_path, _ = resnet18_head
    code, report = run(
        ["eval", "--model", "resnet18", "--head", head_path,
         "--images", labeled_image_dir],
        capsys,
    )
    assert code == 0
    assert report["pruned_top1"] == report["baseline_top1"]
    assert report["num_images"] == 4
