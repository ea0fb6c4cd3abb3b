"""Command-line entry point.

Subcommands: ``scene`` (synthetic rig generation), ``build``, ``adapt``,
``render``, ``sweep``, ``metrics``, ``convert``, ``loss``. All commands are
deterministic given identical inputs and flags; the only randomness (test
scene generation) sits behind an explicit ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import cv2
import numpy as np

from . import adaptive, compact, pipeline, store, synth
from .errors import MpiForgeError
from .geometry import inverse_depth_samples
from .metrics import metric_report
from .mpi import render_view
from .pipeline import PipelineConfig

_DEFAULTS = PipelineConfig()


def _write_png(path: Path, image: np.ndarray):
    data = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    if data.ndim == 3 and data.shape[2] == 3:
        data = cv2.cvtColor(data, cv2.COLOR_RGB2BGR)
    if not cv2.imwrite(str(path), data):
        raise OSError(f"failed to write {path}")


def _write_png16(path: Path, image: np.ndarray):
    data = np.round(np.clip(image, 0.0, 1.0) * 65535.0).astype(np.uint16)
    if data.ndim == 3 and data.shape[2] == 3:
        data = cv2.cvtColor(data, cv2.COLOR_RGB2BGR)
    if not cv2.imwrite(str(path), data):
        raise OSError(f"failed to write {path}")


def _read_image_unit(path: str) -> np.ndarray:
    return store._read_image_unit(Path(path))


def _load_pose(path: str):
    obj = json.loads(Path(path).read_text())
    return store.parse_camera_json(obj)


def _emit_json(payload: dict, out: str | None):
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def _build_kwargs(args) -> dict:
    return dict(
        steps=args.steps,
        gain=args.gain,
        variance_scale=args.variance_scale,
        bias=args.bias,
        color_rate=args.color_rate,
        near=args.near,
        far=args.far,
        num_planes=args.planes,
        reference=_load_pose(args.reference) if args.reference else None,
    )


def _add_build_flags(p: argparse.ArgumentParser):
    p.add_argument("--scene", required=True, help="rig config JSON (cameras + image paths)")
    p.add_argument("--out", required=True, help="output .cmpi path")
    p.add_argument("--planes", type=int, default=_DEFAULTS.num_planes, help="number of depth planes")
    p.add_argument("--near", type=float, default=_DEFAULTS.near, help="nearest plane depth")
    p.add_argument("--far", type=float, default=_DEFAULTS.far, help="farthest plane depth")
    p.add_argument("--steps", type=int, default=_DEFAULTS.steps, help="refinement iterations")
    p.add_argument("--gain", type=float, default=_DEFAULTS.gain, help="alpha residual gain")
    p.add_argument("--variance-scale", type=float, default=_DEFAULTS.variance_scale,
                   help="color variance scale in the photo-consistency term")
    p.add_argument("--bias", type=float, default=_DEFAULTS.bias, help="alpha residual bias")
    p.add_argument("--color-rate", type=float, default=_DEFAULTS.color_rate,
                   help="per-step pull of colors toward the mean visible color")
    p.add_argument("--quant", choices=("f32", "u8"), default="f32", help="container quantization")
    p.add_argument("--reference", default=None,
                   help="camera JSON for the MPI grid (default: average of input cameras)")


def _cmd_scene(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scene = synth.two_plane_scene(seed=args.seed, width=args.width, height=args.height)
    rig = []
    for i, (cam, img) in enumerate(zip(scene.cameras, scene.images)):
        name = f"view{i}.png"
        _write_png16(out / name, img)
        entry = store.camera_to_json(cam)
        entry["image"] = name
        rig.append(entry)
    (out / "rig.json").write_text(json.dumps(rig, indent=2) + "\n")
    (out / "reference.json").write_text(
        json.dumps(store.camera_to_json(scene.reference_camera), indent=2) + "\n"
    )
    (out / "heldout.json").write_text(
        json.dumps(store.camera_to_json(scene.heldout_camera), indent=2) + "\n"
    )
    _write_png16(out / "heldout.png", scene.heldout_image)
    print(f"wrote {len(rig)}-view rig and held-out view to {out}")
    return 0


def _cmd_build(args) -> int:
    cameras, images = store.load_scene(args.scene)
    mpi = pipeline.build_mpi(cameras, images, **_build_kwargs(args))
    store.save_mpi(mpi, args.out, quantization=args.quant)
    print(f"wrote {args.out} ({mpi.num_planes} planes, {mpi.height}x{mpi.width})")
    return 0


def _cmd_adapt(args) -> int:
    cameras, images = store.load_scene(args.scene)
    depths = inverse_depth_samples(args.near, args.far, args.planes)
    kwargs = _build_kwargs(args)
    for consumed in ("near", "far", "num_planes"):
        kwargs.pop(consumed)
    mpi = adaptive.adapt_and_rebuild(
        cameras,
        images,
        depths,
        alpha_floor=args.alpha_floor,
        probe_steps=args.probe_steps,
        **kwargs,
    )
    store.save_mpi(mpi, args.out, quantization=args.quant)
    adapted = [float(d) for d in mpi.depths]
    if args.depths_out:
        Path(args.depths_out).write_text(json.dumps(adapted) + "\n")
    print(json.dumps(adapted))
    print(f"wrote {args.out} ({mpi.num_planes} planes, {mpi.height}x{mpi.width})")
    return 0


def _cmd_render(args) -> int:
    mpi = store.load_mpi(args.mpi)
    target = _load_pose(args.pose)
    _write_png(Path(args.out), render_view(mpi, target))
    print(f"wrote {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    mpi = store.load_mpi(args.mpi)
    cameras, images = store.load_scene(args.scene)
    thresholds = [float(t) for t in args.thresholds.split(",") if t.strip() != ""]
    curve = compact.occupancy_sweep(mpi, list(zip(cameras, images)), thresholds)
    Path(args.out).write_text(curve.to_csv())
    print(f"wrote {args.out} ({len(curve.records)} thresholds)")
    return 0


def _cmd_metrics(args) -> int:
    a = _read_image_unit(args.a)
    b = _read_image_unit(args.b)
    report = metric_report(a, b)
    _emit_json({"ssim": report.ssim, "l1": report.l1, "psnr": report.psnr}, args.out)
    return 0


def _cmd_convert(args) -> int:
    src = Path(args.src)
    dst = Path(args.dst)
    if src.is_dir() or src.name == "manifest.json":
        bundle = src if src.is_dir() else src.parent
        mpi = store.import_web_bundle(bundle)
        store.save_mpi(mpi, dst, quantization=args.quant)
        print(f"wrote {dst}")
    else:
        mpi = store.load_mpi(src)
        store.export_web_bundle(mpi, dst)
        print(f"wrote {dst / 'manifest.json'} and {dst / 'atlas.png'}")
    return 0


def _cmd_loss(args) -> int:
    mpi = store.load_mpi(args.mpi)
    cameras, images = store.load_scene(args.scene)
    report = pipeline.loss_report(mpi, cameras, images, lambda_weight=args.lambda_weight)
    _emit_json(report, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpiforge",
        description="Build, compact, adapt, render, evaluate, and serialize multiplane images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scene", help="generate a synthetic two-plane test rig")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0, help="texture RNG seed")
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--height", type=int, default=128)
    p.set_defaults(fn=_cmd_scene)

    p = sub.add_parser("build", help="build an MPI from a scene rig")
    _add_build_flags(p)
    p.set_defaults(fn=_cmd_build)

    p = sub.add_parser("adapt", help="build with scene-adapted depth sampling")
    _add_build_flags(p)
    p.add_argument("--alpha-floor", type=float, default=_DEFAULTS.alpha_floor,
                   help="prune planes whose alpha never reaches this value")
    p.add_argument("--probe-steps", type=int, default=None,
                   help="refinement iterations for the probe build (default: --steps)")
    p.add_argument("--depths-out", default=None, help="also write the adapted depth list here")
    p.set_defaults(fn=_cmd_adapt)

    p = sub.add_parser("render", help="render an MPI at a pose")
    p.add_argument("--mpi", required=True)
    p.add_argument("--pose", required=True, help="camera JSON (rig schema, single entry)")
    p.add_argument("--out", required=True, help="output PNG")
    p.set_defaults(fn=_cmd_render)

    p = sub.add_parser("sweep", help="occupancy/quality trade-off across alpha thresholds")
    p.add_argument("--mpi", required=True)
    p.add_argument("--scene", required=True, help="ground-truth views (rig schema)")
    p.add_argument("--thresholds", default=",".join(f"{t:g}" for t in _DEFAULTS.thresholds),
                   help="comma-separated ascending thresholds in [0, 0.95]")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("metrics", help="SSIM / L1 / PSNR between two images")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", default=None, help="also write the JSON report here")
    p.set_defaults(fn=_cmd_metrics)

    p = sub.add_parser("convert", help="convert .cmpi <-> web bundle")
    p.add_argument("src", help=".cmpi file, bundle directory, or manifest.json")
    p.add_argument("dst", help="output bundle directory or .cmpi path")
    p.add_argument("--quant", choices=("f32", "u8"), default="f32",
                   help="quantization when writing a .cmpi")
    p.set_defaults(fn=_cmd_convert)

    p = sub.add_parser("loss", help="sparsity and synthesis-error report for an MPI")
    p.add_argument("--mpi", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--lambda", dest="lambda_weight", type=float, default=_DEFAULTS.lambda_weight,
                   help="sparsity weight in the total loss")
    p.add_argument("--out", default=None, help="also write the JSON report here")
    p.set_defaults(fn=_cmd_loss)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (MpiForgeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
