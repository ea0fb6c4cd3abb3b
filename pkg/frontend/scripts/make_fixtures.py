#!/usr/bin/env python3
"""Regenerate the viewer test fixtures from the primary pipeline.

Writes into frontend/test/fixtures/:
    bundle/                manifest.json + atlas.png of a small built MPI
    cli_render.png         CLI render of that bundle at the reference pose
    cli_render_offset.png  CLI render at a non-identity viewer pose
    pose_params.json       the pose used for the offset render
    bad_bundle/            manifest whose plane count exceeds the atlas grid

The offset camera is emitted by the compiled viewer (scripts/emit_pose.mjs),
so build the frontend first. Run after changing the producer and commit.
"""

import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "test" / "fixtures"


def cli(*args):
    subprocess.run([sys.executable, "-m", "mpiforge.cli", *map(str, args)], check=True)


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp_str:
        tmp = Path(tmp_str)
        cli("scene", "--out", tmp / "scene", "--seed", "0", "--width", "64", "--height", "64")
        cli(
            "build", "--scene", tmp / "scene" / "rig.json",
            "--reference", tmp / "scene" / "reference.json",
            "--out", tmp / "scene.cmpi",
            "--planes", "6", "--near", "2", "--far", "8", "--steps", "5",
        )
        bundle = FIXTURES / "bundle"
        shutil.rmtree(bundle, ignore_errors=True)
        cli("convert", tmp / "scene.cmpi", bundle)

        # Render through the bundle-imported MPI so both sides consume the
        # identical 8-bit atlas data.
        cli("convert", bundle, tmp / "bundle.cmpi")
        manifest = json.loads((bundle / "manifest.json").read_text())
        pose = tmp / "reference_pose.json"
        pose.write_text(json.dumps(manifest["camera"]))
        cli("render", "--mpi", tmp / "bundle.cmpi", "--pose", pose,
            "--out", FIXTURES / "cli_render.png")

        pose_params = {
            "yaw": 0.03, "pitch": -0.02, "lateralX": 0.025,
            "lateralY": 0.02, "dolly": 0.12,
        }
        emitted = subprocess.run(
            ["node", str(Path(__file__).parent / "emit_pose.mjs"),
             str(bundle), json.dumps(pose_params)],
            check=True, capture_output=True, text=True,
        ).stdout
        offset_pose = tmp / "offset_pose.json"
        offset_pose.write_text(emitted)
        (FIXTURES / "pose_params.json").write_text(json.dumps(pose_params) + "\n")
        cli("render", "--mpi", tmp / "bundle.cmpi", "--pose", offset_pose,
            "--out", FIXTURES / "cli_render_offset.png")

        bad = FIXTURES / "bad_bundle"
        shutil.rmtree(bad, ignore_errors=True)
        bad.mkdir(parents=True)
        broken = dict(manifest)
        broken["dims"] = dict(manifest["dims"], depth=99)
        broken["depths"] = list(range(99, 0, -1))
        (bad / "manifest.json").write_text(json.dumps(broken))
        shutil.copy(bundle / "atlas.png", bad / "atlas.png")
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
