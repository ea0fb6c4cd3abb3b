"""Pinhole cameras, plane-induced homographies, and depth sampling.

Coordinate conventions (fixed for the whole toolkit):

* World and camera frames are right-handed. A camera looks down its own
  +z axis; x points right and y points down in the image.
* Extrinsics are world-to-camera: ``x_cam = R @ X_world + t``. The camera
  center in world coordinates is ``C = -R.T @ t``.
* Intrinsics map camera coordinates to pixels: ``u ~ K @ x_cam`` followed
  by division by the third component. Pixel (0, 0) is the center of the
  top-left pixel.
* Fronto-parallel planes are defined in the *reference* camera frame by
  ``z_ref = depth`` with normal n = (0, 0, 1).

Depth lists are plain float64 arrays ordered back-to-front: index 0 holds
the farthest (largest) depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import backend
from .errors import (
    EmptyInputError,
    InvalidRangeError,
    ShapeMismatchError,
    SingularHomographyError,
    ValidationError,
)

PLANE_NORMAL = np.array([0.0, 0.0, 1.0])

_ORTHONORMAL_TOL = 1e-9


@dataclass(frozen=True)
class Camera:
    """One pinhole view: intrinsics plus world-to-camera pose."""

    intrinsics: np.ndarray   # (3, 3) upper-triangular, positive focals
    rotation: np.ndarray     # (3, 3) orthonormal, world-to-camera
    translation: np.ndarray  # (3,) world units
    width: int
    height: int

    def __post_init__(self):
        k = np.asarray(self.intrinsics, dtype=np.float64)
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64).reshape(-1)
        if k.shape != (3, 3) or r.shape != (3, 3) or t.shape != (3,):
            raise ShapeMismatchError(
                f"camera arrays must be (3,3), (3,3), (3,); got {k.shape}, {r.shape}, {t.shape}"
            )
        if not (np.isfinite(k).all() and np.isfinite(r).all() and np.isfinite(t).all()):
            raise ValidationError("camera parameters must be finite")
        lower = np.array([k[1, 0], k[2, 0], k[2, 1]])
        if np.any(lower != 0.0):
            raise ValidationError("intrinsics must be upper-triangular")
        if k[0, 0] <= 0 or k[1, 1] <= 0 or k[2, 2] <= 0:
            raise ValidationError("intrinsics must have positive diagonal")
        if np.abs(r.T @ r - np.eye(3)).max() > _ORTHONORMAL_TOL:
            raise ValidationError("rotation is not orthonormal within 1e-9")
        if int(self.width) < 1 or int(self.height) < 1:
            raise ValidationError("image dimensions must be >= 1")
        object.__setattr__(self, "intrinsics", k)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @cached_property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates."""
        return -self.rotation.T @ self.translation

    @classmethod
    def from_center(cls, intrinsics, rotation, center, width, height) -> "Camera":
        rotation = np.asarray(rotation, dtype=np.float64)
        center = np.asarray(center, dtype=np.float64)
        return cls(intrinsics, rotation, -rotation @ center, width, height)


def as_depth_list(depths, min_planes: int = 1) -> np.ndarray:
    """Validate and normalize a back-to-front depth list.

    Depths must be finite, strictly positive, and strictly decreasing
    (index 0 farthest). ``min_planes`` is 2 wherever depth *intervals*
    are needed; a bare MPI container is allowed a single plane.
    """
    d = np.asarray(depths, dtype=np.float64).reshape(-1)
    if d.size < min_planes:
        raise ValidationError(f"need at least {min_planes} depths, got {d.size}")
    if not np.isfinite(d).all() or np.any(d <= 0):
        raise ValidationError("depths must be finite and > 0")
    if d.size > 1 and not np.all(np.diff(d) < 0):
        raise ValidationError("depths must be strictly decreasing (back-to-front)")
    return d


def inverse_depth_samples(near: float, far: float, count: int) -> np.ndarray:
    """Depths whose reciprocals are uniformly spaced between 1/far and 1/near.

    Returned back-to-front: index 0 is exactly ``far``, the last entry is
    exactly ``near``.
    """
    if not (np.isfinite(near) and np.isfinite(far)) or near <= 0 or far <= near:
        raise InvalidRangeError(f"need 0 < near < far, got near={near}, far={far}")
    if count < 2:
        raise InvalidRangeError(f"need count >= 2, got {count}")
    disparities = np.linspace(1.0 / far, 1.0 / near, count)
    depths = 1.0 / disparities
    depths[0] = far
    depths[-1] = near
    return depths


def _relative_pose(reference: Camera, target: Camera):
    r_rel = target.rotation @ reference.rotation.T
    t_rel = target.translation - r_rel @ reference.translation
    return r_rel, t_rel


def plane_homography(reference: Camera, target: Camera, depth: float) -> np.ndarray:
    """3x3 mapping of reference pixels to target pixels via the plane z_ref = depth.

    For a reference pixel x, the result is the target projection of the 3D
    point where the ray through x meets the fronto-parallel plane at
    ``depth`` in the reference frame:

        H = K_t (R_rel + t_rel nᵀ / depth) K_r⁻¹

    Raises ``SingularHomographyError`` when the configuration degenerates
    (the target center lies on the plane).
    """
    if not np.isfinite(depth) or depth <= 0:
        raise InvalidRangeError(f"plane depth must be finite and > 0, got {depth}")
    r_rel, t_rel = _relative_pose(reference, target)
    core = r_rel + np.outer(t_rel, PLANE_NORMAL) / depth
    h = target.intrinsics @ core @ np.linalg.inv(reference.intrinsics)
    _check_invertible(h)
    return h


def _check_invertible(h: np.ndarray):
    scale = np.linalg.norm(h, ord="fro") / np.sqrt(3.0)
    if scale == 0 or not np.isfinite(scale):
        raise SingularHomographyError("homography has no valid scale")
    if abs(np.linalg.det(h)) < 1e-12 * scale**3:
        raise SingularHomographyError("homography is singular")


def warp_image(source: np.ndarray, h: np.ndarray, out_width: int, out_height: int) -> np.ndarray:
    """Resample ``source`` into an (out_height, out_width) grid.

    ``h`` maps source pixel coordinates to output pixel coordinates; each
    output pixel is sampled at the inverse-mapped source location with
    bilinear interpolation and edge-clamp padding.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (3, 3):
        raise ShapeMismatchError(f"homography must be 3x3, got {h.shape}")
    _check_invertible(h)
    hinv = np.linalg.inv(h)

    src = np.asarray(source)
    if src.ndim == 2:
        warped = backend.warp_bilinear(src[:, :, None], hinv, int(out_height), int(out_width))
        return warped[:, :, 0]
    if src.ndim != 3:
        raise ShapeMismatchError(f"source must be HxW or HxWxC, got shape {src.shape}")
    return backend.warp_bilinear(src, hinv, int(out_height), int(out_width))


def _rotation_to_quat(r: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) for an orthonormal matrix."""
    t = np.trace(r)
    if t > 0:
        s = 2.0 * np.sqrt(t + 1.0)
        q = np.array([s / 4, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s,
                      (r[1, 0] - r[0, 1]) / s])
    elif r[0, 0] >= r[1, 1] and r[0, 0] >= r[2, 2]:
        s = 2.0 * np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2])
        q = np.array([(r[2, 1] - r[1, 2]) / s, s / 4, (r[0, 1] + r[1, 0]) / s,
                      (r[0, 2] + r[2, 0]) / s])
    elif r[1, 1] >= r[2, 2]:
        s = 2.0 * np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2])
        q = np.array([(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s, s / 4,
                      (r[1, 2] + r[2, 1]) / s])
    else:
        s = 2.0 * np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1])
        q = np.array([(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s,
                      (r[1, 2] + r[2, 1]) / s, s / 4])
    q /= np.linalg.norm(q)
    if q[0] < 0:
        q = -q
    return q


def _quat_to_rotation(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def average_reference_camera(cameras) -> Camera:
    """Mean camera of a rig: mean center, eigen-averaged rotation, mean intrinsics.

    Rotations are averaged by the accumulated quaternion outer-product
    method: hemisphere-align every quaternion to the first one, take the
    dominant eigenvector of sum(q qᵀ), and sign-align the result to the
    first quaternion. Image dimensions must agree across the rig;
    intrinsics are averaged element-wise.
    """
    cameras = list(cameras)
    if not cameras:
        raise EmptyInputError("cannot average zero cameras")
    sizes = {(c.width, c.height) for c in cameras}
    if len(sizes) != 1:
        raise ValidationError(f"cameras disagree on image size: {sorted(sizes)}")

    quats = [_rotation_to_quat(c.rotation) for c in cameras]
    quats = [q if np.dot(q, quats[0]) >= 0 else -q for q in quats]
    acc = np.zeros((4, 4))
    for q in quats:
        acc += np.outer(q, q)
    eigvals, eigvecs = np.linalg.eigh(acc)
    q_avg = eigvecs[:, np.argmax(eigvals)]
    if np.dot(q_avg, quats[0]) < 0:
        q_avg = -q_avg

    rotation = _quat_to_rotation(q_avg)
    center = np.mean([c.center for c in cameras], axis=0)
    intrinsics = np.mean([c.intrinsics for c in cameras], axis=0)
    return Camera.from_center(intrinsics, rotation, center, cameras[0].width, cameras[0].height)
