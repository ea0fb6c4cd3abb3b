"""Plane sweep volumes and the per-voxel visual cues driving refinement.

For each voxel of the reference grid the cues record how many input
cameras see it (total visibility), the visibility-weighted mean of the
input colors re-projected to that voxel (mean visible color), and how much
those colors disagree (visible color variance). Semi-occluded pixels,
where some voxel is seen by a strict subset of cameras, are granted a
larger active-plane budget in the sparsity objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ShapeMismatchError, ValidationError
from .geometry import Camera, as_depth_list, plane_homography, warp_image
from .mpi import Mpi, warp_alpha_to_view

# Below this summed visibility the weighted statistics fall back to
# unweighted ones to avoid division by ~zero.
VISIBILITY_EPS = 1e-4


@dataclass(frozen=True)
class Psv:
    """One input image re-projected onto every MPI plane (reference grid)."""

    values: np.ndarray   # (D, H, W, 3) float32 in [0, 1]
    source: Camera
    reference: Camera
    depths: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        depths = as_depth_list(self.depths)
        expected = (depths.size, self.reference.height, self.reference.width, 3)
        if v.shape != expected:
            raise ShapeMismatchError(f"PSV must be {expected}, got {v.shape}")
        if not np.isfinite(v).all():
            raise ValidationError("PSV values must be finite")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "depths", depths)


@dataclass(frozen=True)
class CueVolume:
    """Per-voxel visibility, mean visible color, and color variance."""

    total_visibility: np.ndarray  # (D, H, W) in [0, K]
    mean_color: np.ndarray        # (D, H, W, 3) in [0, 1]
    color_variance: np.ndarray    # (D, H, W) >= 0
    view_count: int


@dataclass(frozen=True)
class TauMap:
    """Allowed active-plane count per pixel: 6 at semi-occlusions, else 3."""

    values: np.ndarray  # (H, W) int


def build_psv(image: np.ndarray, source: Camera, reference: Camera, depths) -> Psv:
    """Re-project a source image onto each reference-frame plane.

    Plane d holds the source image pulled back through the inverse of the
    reference-to-source homography at that plane's depth, so scene content
    actually at that depth lands on its true reference pixels.
    """
    depths = as_depth_list(depths)
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ShapeMismatchError(f"image must be (H, W, 3), got {image.shape}")
    if image.shape[:2] != (source.height, source.width):
        raise ValidationError(
            f"image is {image.shape[:2]}, source camera says "
            f"{(source.height, source.width)}"
        )
    planes = np.empty((depths.size, reference.height, reference.width, 3), dtype=np.float32)
    for d in range(depths.size):
        h_ref_to_src = plane_homography(reference, source, depths[d])
        planes[d] = warp_image(image, np.linalg.inv(h_ref_to_src), reference.width, reference.height)
    return Psv(planes, source, reference, depths)


def visibility_volume(mpi: Mpi, view: Camera) -> np.ndarray:
    """Transmittance from ``view`` to every reference-grid voxel, in [0, 1].

    Occluders are accumulated along the view's ray: the alpha planes are
    first warped into the view's grid at their own depths, the product of
    (1 - alpha) over strictly nearer planes is formed there, and each
    reference voxel looks that product up at its projection into the view.
    A voxel is never occluded by its own plane.
    """
    warped_alpha = warp_alpha_to_view(mpi, view)
    trans = backend.suffix_transmittance(warped_alpha)
    out = np.empty((mpi.num_planes, mpi.height, mpi.width), dtype=np.float64)
    for d in range(mpi.num_planes):
        h = plane_homography(mpi.reference, view, mpi.depths[d])
        out[d] = warp_image(
            trans[d].astype(np.float32), h, mpi.width, mpi.height
        ).astype(np.float64)
    return out


def compute_cues(psvs, mpi: Mpi, cameras) -> CueVolume:
    """Total visibility, mean visible color, and visible color variance.

    v = sum_k vis_k;  mu = sum_k vis_k P_k / v;
    var = sum_k vis_k |P_k - mu|^2 / (3 v).
    Where v < 1e-4 the statistics fall back to unweighted mean/variance.
    """
    psvs = list(psvs)
    cameras = list(cameras)
    if len(psvs) != len(cameras) or not psvs:
        raise ShapeMismatchError(
            f"need one PSV per camera, got {len(psvs)} PSVs and {len(cameras)} cameras"
        )
    shape = (mpi.num_planes, mpi.height, mpi.width, 3)
    for p in psvs:
        if p.values.shape != shape:
            raise ShapeMismatchError(f"PSV shape {p.values.shape} does not match MPI {shape}")

    vis = np.stack([visibility_volume(mpi, cam) for cam in cameras])  # (K, D, H, W)
    colors = np.stack([p.values.astype(np.float64) for p in psvs])    # (K, D, H, W, 3)
    return cue_statistics(vis, colors)


def cue_statistics(vis: np.ndarray, colors: np.ndarray) -> CueVolume:
    """Reduce per-view visibilities (K, ...) and colors (K, ..., 3) to cues."""
    k = vis.shape[0]
    total = vis.sum(axis=0)
    weighted_sum = np.einsum("k...,k...c->...c", vis, colors)
    safe_total = np.maximum(total, VISIBILITY_EPS)
    mean_w = weighted_sum / safe_total[..., None]
    sq_w = np.einsum("k...,k...->...", vis, ((colors - mean_w) ** 2).sum(axis=-1))
    var_w = sq_w / (3.0 * safe_total)

    mean_u = colors.mean(axis=0)
    var_u = ((colors - mean_u) ** 2).sum(axis=-1).mean(axis=0) / 3.0

    low = total < VISIBILITY_EPS
    mean = np.where(low[..., None], mean_u, mean_w)
    var = np.where(low, var_u, var_w)
    return CueVolume(total, mean, np.maximum(var, 0.0), k)


def tau_map(cue: CueVolume) -> TauMap:
    """Active-plane budget per pixel from the visibility volume.

    A pixel whose depth column contains a voxel seen by a strict subset of
    the cameras (1 < v < K) is semi-occluded and gets tau = 6; all other
    pixels get tau = 3.
    """
    k = cue.view_count
    if k < 2:
        raise ValidationError(f"tau map needs view_count >= 2, got {k}")
    v = cue.total_visibility
    semi = np.any((v > 1.0) & (v < float(k)), axis=0)
    return TauMap(np.where(semi, 6, 3).astype(np.int64))
