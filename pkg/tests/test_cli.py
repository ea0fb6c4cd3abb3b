import json

import cv2
import numpy as np
import pytest

from mpiforge import cli, store
from mpiforge.mpi import Mpi, values_to_logits

from conftest import frontal_camera


def run_cli(*args):
    return cli.main(list(args))


@pytest.fixture(scope="module")
def scene_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("scene")
    assert run_cli("scene", "--out", str(out), "--seed", "0",
                   "--width", "48", "--height", "48") == 0
    return out


@pytest.fixture(scope="module")
def built_mpi(scene_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("mpi") / "scene.cmpi"
    code = run_cli(
        "build", "--scene", str(scene_dir / "rig.json"), "--out", str(out),
        "--planes", "8", "--near", "2", "--far", "8", "--steps", "3",
    )
    assert code == 0
    return out


class TestSceneCommand:
    def test_outputs(self, scene_dir):
        rig = json.loads((scene_dir / "rig.json").read_text())
        assert len(rig) == 4
        assert (scene_dir / "heldout.json").exists()
        assert (scene_dir / "heldout.png").exists()
        img = cv2.imread(str(scene_dir / "view0.png"), cv2.IMREAD_UNCHANGED)
        assert img.dtype == np.uint16

    def test_seed_determinism(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_cli("scene", "--out", str(a), "--seed", "7", "--width", "32", "--height", "32")
        run_cli("scene", "--out", str(b), "--seed", "7", "--width", "32", "--height", "32")
        assert (a / "view0.png").read_bytes() == (b / "view0.png").read_bytes()


class TestBuildRenderLoop:
    def test_build_writes_container(self, built_mpi):
        m = store.load_mpi(built_mpi)
        assert m.num_planes == 8

    def test_render_heldout(self, scene_dir, built_mpi, tmp_path):
        out = tmp_path / "view.png"
        code = run_cli("render", "--mpi", str(built_mpi),
                       "--pose", str(scene_dir / "heldout.json"), "--out", str(out))
        assert code == 0
        img = cv2.imread(str(out))
        assert img is not None and img.shape == (48, 48, 3)

    def test_render_deterministic(self, scene_dir, built_mpi, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        pose = str(scene_dir / "heldout.json")
        run_cli("render", "--mpi", str(built_mpi), "--pose", pose, "--out", str(a))
        run_cli("render", "--mpi", str(built_mpi), "--pose", pose, "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_single_plane_reference_render_is_plane_color(self, tmp_path):
        cam = frontal_camera(width=12, height=10)
        colors = np.random.default_rng(0).random((1, 10, 12, 3))
        logits = np.concatenate(
            [values_to_logits(colors), np.full((1, 10, 12, 1), 745.0)], axis=-1
        )
        m = Mpi(logits, [3.0], cam)
        path = tmp_path / "one.cmpi"
        store.save_mpi(m, path)
        pose = tmp_path / "pose.json"
        pose.write_text(json.dumps(store.camera_to_json(cam)))
        out = tmp_path / "r.png"
        assert run_cli("render", "--mpi", str(path), "--pose", str(pose), "--out", str(out)) == 0
        img = cv2.cvtColor(cv2.imread(str(out)), cv2.COLOR_BGR2RGB)
        expected = np.round(m.values()[0, :, :, :3].astype(np.float64) * 255)
        np.testing.assert_allclose(img.astype(np.float64), expected, atol=1.0)


class TestSweepCommand:
    def test_csv_written(self, scene_dir, built_mpi, tmp_path):
        out = tmp_path / "sweep.csv"
        code = run_cli("sweep", "--mpi", str(built_mpi),
                       "--scene", str(scene_dir / "rig.json"),
                       "--thresholds", "0,0.25,0.5,0.75,0.95", "--out", str(out))
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "threshold,occupancy,ssim,l1"
        assert len(lines) == 6
        occ = [float(l.split(",")[1]) for l in lines[1:]]
        assert all(b <= a for a, b in zip(occ, occ[1:]))
        ts = [float(l.split(",")[0]) for l in lines[1:]]
        assert ts[0] >= 0.0 and ts[-1] <= 0.95


class TestMetricsCommand:
    def test_json_report(self, scene_dir, tmp_path, capsys):
        out = tmp_path / "m.json"
        code = run_cli("metrics", "--a", str(scene_dir / "heldout.png"),
                       "--b", str(scene_dir / "heldout.png"), "--out", str(out))
        assert code == 0
        report = json.loads(out.read_text())
        assert set(report) == {"ssim", "l1", "psnr"}
        assert abs(report["ssim"] - 1.0) < 1e-9
        assert report["l1"] == 0.0
        printed = json.loads(capsys.readouterr().out)
        assert printed == report


class TestLossCommand:
    def test_report_fields(self, scene_dir, built_mpi, tmp_path, capsys):
        out = tmp_path / "loss.json"
        code = run_cli("loss", "--mpi", str(built_mpi),
                       "--scene", str(scene_dir / "rig.json"), "--out", str(out))
        assert code == 0
        capsys.readouterr()
        report = json.loads(out.read_text())
        assert {"excess", "a_min", "sparsity_loss", "synthesis_error", "total_loss"} <= set(report)
        assert report["total_loss"] == pytest.approx(
            report["synthesis_error"] + report["lambda"] * report["sparsity_loss"]
        )


class TestConvertCommand:
    def test_cmpi_to_bundle_and_back(self, built_mpi, tmp_path):
        bundle = tmp_path / "bundle"
        assert run_cli("convert", str(built_mpi), str(bundle)) == 0
        assert (bundle / "manifest.json").exists() and (bundle / "atlas.png").exists()
        back = tmp_path / "back.cmpi"
        assert run_cli("convert", str(bundle), str(back)) == 0
        m1 = store.load_mpi(built_mpi)
        m2 = store.load_mpi(back)
        err = np.abs(m2.values().astype(np.float64) - m1.values().astype(np.float64))
        assert err.max() <= 1.0 / 510.0 + 1e-7


class TestAdaptCommand:
    def test_adapt_emits_depth_list(self, scene_dir, tmp_path, capsys):
        out = tmp_path / "adapted.cmpi"
        depths_out = tmp_path / "depths.json"
        code = run_cli(
            "adapt", "--scene", str(scene_dir / "rig.json"), "--out", str(out),
            "--planes", "8", "--near", "2", "--far", "8", "--steps", "3",
            "--depths-out", str(depths_out),
        )
        assert code == 0
        depths = json.loads(depths_out.read_text())
        assert len(depths) == 8
        assert all(b < a for a, b in zip(depths, depths[1:]))
        printed = capsys.readouterr().out.strip().split("\n")[0]
        assert json.loads(printed) == depths


class TestErrorPaths:
    def test_unknown_command_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["frobnicate"])
        assert exc.value.code == 2

    def test_missing_file_exits_1(self, tmp_path, capsys):
        code = run_cli("render", "--mpi", str(tmp_path / "no.cmpi"),
                       "--pose", str(tmp_path / "no.json"), "--out", str(tmp_path / "x.png"))
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_corrupt_container_exits_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.cmpi"
        bad.write_bytes(b"CMPI\x01\x00\x00garbage")
        pose = tmp_path / "pose.json"
        pose.write_text(json.dumps(store.camera_to_json(frontal_camera())))
        code = run_cli("render", "--mpi", str(bad), "--pose", str(pose),
                       "--out", str(tmp_path / "x.png"))
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_help_lists_commands(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for cmd in ("build", "adapt", "render", "sweep", "metrics", "convert", "loss"):
            assert cmd in out
