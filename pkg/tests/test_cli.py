import json
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from landmarkseg.cli import main
from landmarkseg.data import SyntheticShapeSpec

TINY_MODEL = {"image_size": 32, "latent_dim": 16, "graph_feature_maps": 8,
              "cheb_terms": 3, "fc_hidden": [32]}


def run(argv):
    return main([str(a) for a in argv])


def tree_bytes(root, skip=("run_manifest.json",)):
    out = {}
    for path in sorted(Path(root).rglob("*")):
        if path.is_file() and path.name not in skip:
            out[str(path.relative_to(root))] = path.read_bytes()
    return out


@pytest.fixture(scope="module")
def tiny_spec(tmp_path_factory):
    spec_path = tmp_path_factory.mktemp("spec") / "spec.json"
    spec = SyntheticShapeSpec(image_size=32, seed=0)
    spec_path.write_text(json.dumps(spec.to_dict()))
    return spec_path


@pytest.fixture(scope="module")
def tiny_config(tmp_path_factory):
    cfg_path = tmp_path_factory.mktemp("cfg") / "config.json"
    cfg_path.write_text(json.dumps({"model": TINY_MODEL}))
    return cfg_path


@pytest.fixture(scope="module")
def workspace(tmp_path_factory, tiny_spec, tiny_config):
    """A tiny but complete CLI pipeline shared by the assertions below."""
    root = tmp_path_factory.mktemp("ws")
    assert run(["gen-data", "--spec", tiny_spec, "-n", 14,
                "--out", root / "data"]) == 0
    common = ["--data", root / "data", "--split", "train", "--split-seed", 3,
              "--config", tiny_config]
    assert run(["pretrain", "--kind", "image-vae", "--epochs", 2,
                "--out", root / "ivae", "--seed", 1, *common]) == 0
    assert run(["pretrain", "--kind", "graph-vae", "--epochs", 15,
                "--out", root / "gvae", "--seed", 2, *common]) == 0
    assert run(["train-hybrid", "--image-vae", root / "ivae/model.ckpt",
                "--graph-vae", root / "gvae/model.ckpt", "--epochs", 2,
                "--out", root / "hybrid", "--seed", 3, *common]) == 0
    assert run(["train-hybrid", "--variant", "dual",
                "--image-vae", root / "ivae/model.ckpt",
                "--graph-vae", root / "gvae/model.ckpt", "--epochs", 1,
                "--out", root / "dual", "--seed", 4, *common]) == 0
    assert run(["train-baseline", "--kind", "pca",
                "--image-vae", root / "ivae/model.ckpt", "--epochs", 1,
                "--out", root / "pca", "--seed", 5, *common]) == 0
    assert run(["train-baseline", "--kind", "unet",
                "--image-vae", root / "ivae/model.ckpt", "--epochs", 1,
                "--out", root / "unet", "--seed", 6, *common]) == 0
    return root


class TestGenData:
    def test_rerun_byte_identical(self, tmp_path, tiny_spec):
        for name in ("a", "b"):
            assert run(["gen-data", "--spec", tiny_spec, "-n", 5,
                        "--out", tmp_path / name]) == 0
        assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")

    def test_sample_file_count(self, tmp_path, tiny_spec):
        assert run(["gen-data", "--spec", tiny_spec, "-n", 6,
                    "--out", tmp_path / "d"]) == 0
        pgms = list((tmp_path / "d").glob("s*_image.pgm"))
        assert len(pgms) == 6

    def test_refuses_overwrite_without_force(self, tmp_path, tiny_spec, capsys):
        assert run(["gen-data", "--spec", tiny_spec, "-n", 4,
                    "--out", tmp_path / "d"]) == 0
        assert run(["gen-data", "--spec", tiny_spec, "-n", 4,
                    "--out", tmp_path / "d"]) == 2
        assert "--force" in capsys.readouterr().err
        assert run(["gen-data", "--spec", tiny_spec, "-n", 4,
                    "--out", tmp_path / "d", "--force"]) == 0

    def test_invalid_spec_field_named(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"image_size": 32, "bogus_field": 1}))
        assert run(["gen-data", "--spec", bad, "-n", 3,
                    "--out", tmp_path / "d"]) == 2
        assert "bogus_field" in capsys.readouterr().err


class TestTraining:
    def test_loss_trace_rows_equal_epochs(self, workspace):
        rows = (workspace / "gvae/loss_trace.csv").read_text().strip().splitlines()
        assert len(rows) - 1 == 15

    def test_hybrid_without_pretraining_errors(self, workspace, tiny_config,
                                               capsys):
        code = run(["train-hybrid", "--data", workspace / "data",
                    "--config", tiny_config, "--out", workspace / "nope"])
        assert code == 2
        assert "pretrain" in capsys.readouterr().err

    def test_run_manifest_records_seed_and_hashes(self, workspace):
        manifest = json.loads((workspace / "hybrid/run_manifest.json").read_text())
        assert manifest["seed"] == 3
        assert "dataset_hash" in manifest and "config_hash" in manifest
        assert manifest["parameter_count"] > 0

    def test_pretrain_determinism(self, tmp_path, workspace, tiny_config):
        args = ["pretrain", "--kind", "graph-vae", "--epochs", 4, "--seed", 9,
                "--data", workspace / "data", "--split", "train",
                "--split-seed", 3, "--config", tiny_config]
        assert run([*args, "--out", tmp_path / "g1"]) == 0
        assert run([*args, "--out", tmp_path / "g2"]) == 0
        assert (tmp_path / "g1/model.ckpt").read_bytes() == \
            (tmp_path / "g2/model.ckpt").read_bytes()
        assert (tmp_path / "g1/loss_trace.csv").read_bytes() == \
            (tmp_path / "g2/loss_trace.csv").read_bytes()


class TestExperiments:
    def test_experiment1_outputs(self, workspace, tmp_path, tiny_config):
        out = tmp_path / "exp1"
        assert run(["experiment1",
                    "--model", f"hybrid={workspace / 'hybrid/model.ckpt'}",
                    "--model", f"pca={workspace / 'pca/model.ckpt'}",
                    "--data", workspace / "data", "--split", "test",
                    "--split-seed", 3, "--config", tiny_config,
                    "--out", out, "--overlays", 2]) == 0
        records = (out / "records.csv").read_text().strip().splitlines()
        n_test = 14 - int(0.7 * 14) - int(0.1 * 14)
        assert len(records) - 1 == 2 * n_test
        assert (out / "summary.csv").exists()
        assert (out / "pvalues_mse_px2.csv").exists()
        for svg in out.glob("overlay_*.svg"):
            ET.parse(svg)

    def test_experiment1_self_comparison_degenerate(self, workspace, tmp_path,
                                                    tiny_config):
        out = tmp_path / "exp1self"
        assert run(["experiment1",
                    "--model", f"a={workspace / 'hybrid/model.ckpt'}",
                    "--model", f"b={workspace / 'hybrid/model.ckpt'}",
                    "--data", workspace / "data", "--split", "test",
                    "--split-seed", 3, "--config", tiny_config,
                    "--out", out, "--overlays", 0]) == 0
        matrix = (out / "pvalues_mse_px2.csv").read_text()
        assert "degenerate" in matrix

    def test_experiment2_writes_landmark_files(self, workspace, tmp_path,
                                               tiny_config):
        out = tmp_path / "exp2"
        assert run(["experiment2",
                    "--model", f"hybrid={workspace / 'hybrid/model.ckpt'}",
                    "--data", workspace / "data", "--split", "test",
                    "--split-seed", 3, "--config", tiny_config,
                    "--out", out, "--overlays", 0]) == 0
        files = list((out / "landmarks").glob("hybrid_*.txt"))
        n_test = 14 - int(0.7 * 14) - int(0.1 * 14)
        assert len(files) == n_test
        from landmarkseg.data import load_landmarks
        coords, _ = load_landmarks(files[0])
        assert coords.shape == (40, 2)

    def test_experiment3_curves_and_svg(self, workspace, tmp_path, tiny_config):
        out = tmp_path / "exp3"
        assert run(["experiment3", "--dual", workspace / "dual/model.ckpt",
                    "--unet", workspace / "unet/model.ckpt",
                    "--box-fracs", "0,0.5",
                    "--data", workspace / "data", "--split", "test",
                    "--split-seed", 3, "--config", tiny_config,
                    "--out", out, "--seed", 5]) == 0
        curves = (out / "occlusion_curves.csv").read_text().strip().splitlines()
        assert curves[0] == "branch,box_px,dice_mean,hausdorff_mm"
        assert len(curves) - 1 == 3 * 2  # three branches, two box sizes
        ET.parse(out / "dice_vs_box.svg")

    def test_experiment3_box_zero_equals_clean_metrics(self, workspace,
                                                       tmp_path, tiny_config):
        import csv

        clean = tmp_path / "clean"
        assert run(["experiment1",
                    "--model", f"dual={workspace / 'dual/model.ckpt'}",
                    "--data", workspace / "data", "--split", "test",
                    "--split-seed", 3, "--config", tiny_config,
                    "--out", clean, "--overlays", 0]) == 0
        sweep = tmp_path / "sweep"
        assert run(["experiment3", "--dual", workspace / "dual/model.ckpt",
                    "--unet", workspace / "unet/model.ckpt",
                    "--box-fracs", "0",
                    "--data", workspace / "data", "--split", "test",
                    "--split-seed", 3, "--config", tiny_config,
                    "--out", sweep, "--seed", 7]) == 0
        with open(clean / "records.csv", newline="") as fh:
            exp1_mse = {r["sample_id"]: r["mse_px2"]
                        for r in csv.DictReader(fh)}
        with open(sweep / "occlusion_records.csv", newline="") as fh:
            exp3_mse = {r["sample_id"]: r["mse_px2"]
                        for r in csv.DictReader(fh)
                        if r["branch"] == "dual/landmark-raster"
                        and r["box_px"] == "0"}
        assert exp1_mse == exp3_mse

    def test_experiment3_rerun_byte_identical(self, workspace, tmp_path,
                                              tiny_config):
        outs = []
        for name in ("r1", "r2"):
            out = tmp_path / name
            assert run(["experiment3", "--dual", workspace / "dual/model.ckpt",
                        "--unet", workspace / "unet/model.ckpt",
                        "--box-fracs", "0,0.25",
                        "--data", workspace / "data", "--split", "test",
                        "--split-seed", 3, "--config", tiny_config,
                        "--out", out, "--seed", 5]) == 0
            outs.append(tree_bytes(out))
        assert outs[0] == outs[1]


class TestPlot:
    def test_line_plot_from_csv(self, tmp_path):
        csv_path = tmp_path / "curve.csv"
        csv_path.write_text(
            "branch,box_px,dice_mean\nunet,0,0.9\nunet,16,0.5\ndual,0,0.8\n")
        out = tmp_path / "plot.svg"
        assert run(["plot", "--csv", csv_path, "--kind", "line", "--x",
                    "box_px", "--y", "dice_mean", "--group", "branch",
                    "--out", out]) == 0
        ET.parse(out)

    def test_box_plot_from_csv(self, tmp_path):
        csv_path = tmp_path / "records.csv"
        csv_path.write_text(
            "model,mse\na,1.0\na,2.0\nb,1.5\n")
        out = tmp_path / "box.svg"
        assert run(["plot", "--csv", csv_path, "--kind", "box",
                    "--value", "mse", "--group", "model", "--out", out]) == 0
        ET.parse(out)

    def test_single_point_series(self, tmp_path):
        csv_path = tmp_path / "one.csv"
        csv_path.write_text("x,y\n1,2\n")
        out = tmp_path / "one.svg"
        assert run(["plot", "--csv", csv_path, "--kind", "line", "--x", "x",
                    "--y", "y", "--out", out]) == 0
        tree = ET.parse(out)
        ns = "{http://www.w3.org/2000/svg}"
        assert tree.findall(f".//{ns}circle")

    def test_empty_csv_errors(self, tmp_path, capsys):
        csv_path = tmp_path / "empty.csv"
        csv_path.write_text("x,y\n")
        assert run(["plot", "--csv", csv_path, "--kind", "line", "--x", "x",
                    "--y", "y", "--out", tmp_path / "e.svg"]) == 2


class TestEntryPoint:
    def test_console_script_help(self):
        proc = subprocess.run(
            [sys.executable, "-m", "landmarkseg.cli", "--help"],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert "gen-data" in proc.stdout

    def test_out_root_env(self, tmp_path, tiny_spec, monkeypatch):
        monkeypatch.setenv("LANDMARKSEG_OUT_ROOT", str(tmp_path))
        assert run(["gen-data", "--spec", tiny_spec, "-n", 4,
                    "--out", "relative_dir"]) == 0
        assert (tmp_path / "relative_dir/manifest.json").exists()
