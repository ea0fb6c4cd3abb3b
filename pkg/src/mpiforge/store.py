"""Bit-exact MPI container, scene ingestion, and viewer-bundle export.

Container layout (all little-endian):

    magic   4 bytes  b"CMPI"
    version u16      1
    quant   u8       0 = float32 samples, 1 = uint8 samples
    D, H, W u32 each
    depths  D x f32
    camera  21 x f32 (9 intrinsics, 9 rotation, 3 translation, row-major)
    planes  D payloads, each:
        run lengths: u32 sequence summing to H*W, alternating
            zero-run / nonzero-run, starting with a zero-run (may be 0)
        samples: RGBA for the nonzero voxels only, row-major,
            4 x f32 or 4 x u8 per voxel depending on quant

Zero runs cover exactly the voxels of the explicit zero mask, so a decode
reproduces the materialized RGBA values and the mask bit-exactly at f32.
The pose is stored at f32; decoding re-orthonormalizes the rotation.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import cv2
import numpy as np

from .errors import (
    FormatError,
    InsufficientViewsError,
    ValidationError,
)
from .geometry import Camera
from .mpi import Mpi, logit

MAGIC = b"CMPI"
VERSION = 1

_QUANT_CODES = {"f32": 0, "u8": 1}
_QUANT_NAMES = {v: k for k, v in _QUANT_CODES.items()}

# Logits that saturate to exactly 0.0f / 1.0f after materialization.
_NEG_SATURATED = -745.0
_POS_SATURATED = 745.0


def _encode_runs(mask_flat: np.ndarray) -> np.ndarray:
    """Alternating zero-run/nonzero-run lengths, starting with a zero-run."""
    n = mask_flat.size
    if n == 0:
        return np.zeros(0, dtype=np.uint32)
    change = np.flatnonzero(mask_flat[1:] != mask_flat[:-1]) + 1
    bounds = np.concatenate([[0], change, [n]])
    lengths = np.diff(bounds)
    if not mask_flat[0]:  # first run is nonzero: prepend an empty zero-run
        lengths = np.concatenate([[0], lengths])
    return lengths.astype(np.uint32)


def encode_mpi(mpi: Mpi, quantization: str = "f32") -> bytes:
    """Serialize an MPI, storing samples only for unmasked voxels."""
    if quantization not in _QUANT_CODES:
        raise ValidationError(f"quantization must be one of {sorted(_QUANT_CODES)}")
    depths32 = mpi.depths.astype(np.float32)
    if np.any(np.diff(depths32) >= 0):
        raise ValidationError("depths collide when stored at float32 precision")

    cam = mpi.reference
    header = [
        MAGIC,
        struct.pack("<HB", VERSION, _QUANT_CODES[quantization]),
        struct.pack("<III", mpi.num_planes, mpi.height, mpi.width),
        depths32.tobytes(),
        np.concatenate(
            [cam.intrinsics.ravel(), cam.rotation.ravel(), cam.translation]
        ).astype(np.float32).tobytes(),
    ]

    values = mpi.values()
    chunks = header
    for d in range(mpi.num_planes):
        mask_flat = mpi.zero_mask[d].ravel()
        chunks.append(_encode_runs(mask_flat).tobytes())
        samples = values[d].reshape(-1, 4)[~mask_flat]
        if quantization == "u8":
            samples = np.round(samples * 255.0).astype(np.uint8)
        chunks.append(np.ascontiguousarray(samples).tobytes())
    return b"".join(chunks)


class _Reader:
    """Byte cursor that turns truncation into offset-carrying format errors."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, count: int, what: str) -> bytes:
        if self.pos + count > len(self.data):
            raise FormatError(f"truncated while reading {what}", self.pos)
        out = self.data[self.pos : self.pos + count]
        self.pos += count
        return out

    def array(self, dtype, count: int, what: str) -> np.ndarray:
        raw = self.take(int(count) * np.dtype(dtype).itemsize, what)
        return np.frombuffer(raw, dtype=dtype)


def _values_to_exact_logits(values: np.ndarray) -> np.ndarray:
    """Logits whose float32 materialization reproduces ``values`` bit-exactly."""
    v = values.astype(np.float64)
    with np.errstate(divide="ignore"):
        logits = logit(np.clip(v, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0)))
    logits = np.where(v <= 0.0, _NEG_SATURATED, logits)
    logits = np.where(v >= 1.0, _POS_SATURATED, logits)
    return logits


def decode_mpi(data: bytes) -> Mpi:
    """Inverse of ``encode_mpi``; rejects malformed input with a byte offset."""
    r = _Reader(data)
    if r.take(4, "magic") != MAGIC:
        raise FormatError("bad magic", 0)
    version, quant_code = struct.unpack("<HB", r.take(3, "version/quantization"))
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if quant_code not in _QUANT_NAMES:
        raise FormatError(f"unknown quantization code {quant_code}", 6)
    d, h, w = struct.unpack("<III", r.take(12, "dimensions"))
    if d < 1 or h < 1 or w < 1:
        raise FormatError(f"bad dimensions {(d, h, w)}", 7)
    depths = r.array(np.dtype("<f4"), d, "depth list").astype(np.float64)
    if not np.isfinite(depths).all() or np.any(depths <= 0) or np.any(np.diff(depths) >= 0):
        raise FormatError("depth list is not strictly decreasing and positive", r.pos - 4 * d)
    cam_raw = r.array(np.dtype("<f4"), 21, "camera").astype(np.float64)
    reference = _camera_from_f32(cam_raw, w, h, r.pos - 84)

    pixels = h * w
    values = np.zeros((d, h, w, 4), dtype=np.float32)
    mask = np.zeros((d, h, w), dtype=bool)
    for plane in range(d):
        mask_flat = np.zeros(pixels, dtype=bool)
        covered = 0
        run_is_zero = True
        while covered < pixels:
            run_start = r.pos
            (length,) = struct.unpack("<I", r.take(4, f"run length of plane {plane}"))
            if covered + length > pixels:
                raise FormatError(
                    f"run lengths of plane {plane} exceed the pixel count", run_start
                )
            if run_is_zero:
                mask_flat[covered : covered + length] = True
            covered += length
            run_is_zero = not run_is_zero
        count = int(pixels - mask_flat.sum())
        if quant_code == _QUANT_CODES["u8"]:
            samples = r.array(np.uint8, count * 4, f"samples of plane {plane}")
            samples = (samples.astype(np.float64).reshape(-1, 4) / 255.0).astype(np.float32)
        else:
            samples = r.array(np.dtype("<f4"), count * 4, f"samples of plane {plane}")
            samples = samples.reshape(-1, 4)
            if not np.isfinite(samples).all():
                raise FormatError(f"non-finite samples in plane {plane}", r.pos)
        flat = values[plane].reshape(-1, 4)
        flat[~mask_flat] = samples
        mask[plane] = mask_flat.reshape(h, w)
    if r.pos != len(data):
        raise FormatError(f"{len(data) - r.pos} trailing bytes after payload", r.pos)

    return Mpi(_values_to_exact_logits(values), depths, reference, mask)


def _camera_from_f32(raw: np.ndarray, width: int, height: int, offset: int) -> Camera:
    intrinsics = raw[:9].reshape(3, 3)
    rotation = raw[9:18].reshape(3, 3)
    translation = raw[18:21]
    # f32 storage perturbs orthonormality past the Camera tolerance; project
    # back with a polar decomposition.
    u, _, vt = np.linalg.svd(rotation)
    rotation = u @ vt
    if np.linalg.det(rotation) < 0:
        u[:, -1] = -u[:, -1]
        rotation = u @ vt
    try:
        return Camera(intrinsics, rotation, translation, width, height)
    except ValidationError as exc:
        raise FormatError(f"invalid stored camera: {exc}", offset) from exc


def save_mpi(mpi: Mpi, path, quantization: str = "f32"):
    Path(path).write_bytes(encode_mpi(mpi, quantization))


def load_mpi(path) -> Mpi:
    return decode_mpi(Path(path).read_bytes())


def parse_camera_json(obj: dict, base_dir: Path = None) -> Camera:
    """Camera from the rig-config JSON schema (also used for pose files)."""
    try:
        intrinsics = np.asarray(obj["intrinsics"], dtype=np.float64).reshape(3, 3)
        rotation = np.asarray(obj["rotation"], dtype=np.float64).reshape(3, 3)
        translation = np.asarray(obj["translation"], dtype=np.float64).reshape(3)
        width = int(obj["width"])
        height = int(obj["height"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed camera entry: {exc}") from exc
    return Camera(intrinsics, rotation, translation, width, height)


def _read_image_unit(path: Path) -> np.ndarray:
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise OSError(f"cannot read image file {path}")
    if raw.ndim == 2:
        raw = raw[:, :, None].repeat(3, axis=2)
    if raw.shape[2] == 4:
        raw = raw[:, :, :3]
    raw = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
    if raw.dtype == np.uint8:
        return raw.astype(np.float32) / np.float32(255.0)
    if raw.dtype == np.uint16:
        return raw.astype(np.float32) / np.float32(65535.0)
    raise ValidationError(f"unsupported image dtype {raw.dtype} in {path}")


def load_scene(config_path):
    """Load a rig config: a JSON array of camera entries with image paths.

    Returns (cameras, images) with images normalized to [0, 1] float32.
    At least two views are required.
    """
    path = Path(config_path)
    try:
        entries = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"scene config {path} is not valid JSON: {exc}") from exc
    if isinstance(entries, dict):
        entries = entries.get("cameras", entries)
    if not isinstance(entries, list):
        raise ValidationError(f"scene config {path} must be a JSON array of cameras")
    if len(entries) < 2:
        raise InsufficientViewsError(
            f"scene config lists {len(entries)} view(s); at least 2 are required"
        )
    cameras = []
    images = []
    for i, entry in enumerate(entries):
        camera = parse_camera_json(entry)
        if "image" not in entry:
            raise ValidationError(f"camera {i} has no 'image' path")
        image = _read_image_unit(path.parent / entry["image"])
        if image.shape[:2] != (camera.height, camera.width):
            raise ValidationError(
                f"camera {i} declares {camera.height}x{camera.width} but "
                f"{entry['image']} is {image.shape[0]}x{image.shape[1]}"
            )
        cameras.append(camera)
        images.append(image)
    return cameras, images


def camera_to_json(camera: Camera) -> dict:
    return {
        "intrinsics": [float(v) for v in camera.intrinsics.ravel()],
        "rotation": [float(v) for v in camera.rotation.ravel()],
        "translation": [float(v) for v in camera.translation],
        "width": camera.width,
        "height": camera.height,
    }


def atlas_grid(num_planes: int):
    """Bundle atlas layout: ceil(sqrt(D)) columns, row-major by plane index."""
    cols = int(np.ceil(np.sqrt(num_planes)))
    rows = int(np.ceil(num_planes / cols))
    return cols, rows


def export_web_bundle(mpi: Mpi, out_dir) -> dict:
    """Write manifest.json plus an RGBA PNG atlas packing all planes.

    The alpha channel carries the materialized alpha with exact zeros
    preserved; returns the manifest as a dict.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols, rows = atlas_grid(mpi.num_planes)
    h, w = mpi.height, mpi.width
    atlas = np.zeros((rows * h, cols * w, 4), dtype=np.uint8)
    quantized = np.round(mpi.values().astype(np.float64) * 255.0).astype(np.uint8)
    for d in range(mpi.num_planes):
        r, c = divmod(d, cols)
        atlas[r * h : (r + 1) * h, c * w : (c + 1) * w] = quantized[d]
    ok = cv2.imwrite(str(out / "atlas.png"), cv2.cvtColor(atlas, cv2.COLOR_RGBA2BGRA))
    if not ok:
        raise OSError(f"failed to write atlas to {out / 'atlas.png'}")

    manifest = {
        "version": 1,
        "dims": {"depth": mpi.num_planes, "height": h, "width": w},
        "depths": [float(d) for d in mpi.depths],
        "camera": camera_to_json(mpi.reference),
        "atlas": {"file": "atlas.png", "columns": cols, "rows": rows},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def import_web_bundle(bundle_dir) -> Mpi:
    """Rebuild an MPI from a viewer bundle (8-bit, so lossy vs the container)."""
    bundle = Path(bundle_dir)
    manifest = json.loads((bundle / "manifest.json").read_text())
    dims = manifest["dims"]
    d, h, w = int(dims["depth"]), int(dims["height"]), int(dims["width"])
    cols = int(manifest["atlas"]["columns"])
    raw = cv2.imread(str(bundle / manifest["atlas"]["file"]), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise OSError(f"cannot read atlas {bundle / manifest['atlas']['file']}")
    if raw.ndim != 3 or raw.shape[2] != 4:
        raise ValidationError("atlas must be an RGBA image")
    atlas = cv2.cvtColor(raw, cv2.COLOR_BGRA2RGBA)
    values = np.empty((d, h, w, 4), dtype=np.float32)
    for plane in range(d):
        r, c = divmod(plane, cols)
        tile = atlas[r * h : (r + 1) * h, c * w : (c + 1) * w]
        values[plane] = tile.astype(np.float32) / np.float32(255.0)
    camera = parse_camera_json(manifest["camera"])
    depths = np.asarray(manifest["depths"], dtype=np.float64)
    # Only all-zero texels are compacted voxels; alpha can quantize to zero
    # while the stored color is still meaningful within the error bound.
    mask = np.all(values == 0.0, axis=-1)
    return Mpi(_values_to_exact_logits(values), depths, camera, mask)
