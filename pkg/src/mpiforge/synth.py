"""Synthetic camera rigs and analytically rendered test scenes.

The two-plane scene is a Lambertian world made of an infinite textured
background plane and a textured opaque square floating in front of it,
both fronto-parallel to a jittered 2x2 camera rig plus a held-out
novel-view camera near the rig center. Textures are smooth closed-form
functions of world coordinates, so ground-truth renders contain no
resampling error and every view is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Camera


@dataclass(frozen=True)
class PlanarTexture:
    """Smooth RGB texture over world (x, y) with a guaranteed gradient floor.

    R and G carry a sine/cosine quadrature pair along one direction, so
    |grad R|^2 + |grad G|^2 is exactly constant: no patch of the texture is
    locally flat, and re-projected views disagree everywhere when the
    assumed depth is wrong. B adds an independent wave along the
    perpendicular direction.
    """

    direction: float          # radians
    frequency: float          # rad per world unit
    phase: float
    cross_phase: float
    detail_vectors: np.ndarray  # (3, 2) per-channel secondary wave vectors
    detail_phases: np.ndarray   # (3,)
    amplitude: float = 0.27
    detail_amplitude: float = 0.06

    @classmethod
    def random(cls, rng: np.random.Generator, min_freq: float, max_freq: float) -> "PlanarTexture":
        mags = rng.uniform(2.0 * min_freq, 2.0 * max_freq, size=3)
        angles = rng.uniform(0.0, 2.0 * np.pi, size=3)
        return cls(
            direction=rng.uniform(0.0, np.pi),
            frequency=rng.uniform(min_freq, max_freq),
            phase=rng.uniform(0.0, 2.0 * np.pi),
            cross_phase=rng.uniform(0.0, 2.0 * np.pi),
            detail_vectors=np.stack([mags * np.cos(angles), mags * np.sin(angles)], axis=-1),
            detail_phases=rng.uniform(0.0, 2.0 * np.pi, size=3),
        )

    def sample(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        c, s = np.cos(self.direction), np.sin(self.direction)
        u = self.frequency * (c * x + s * y) + self.phase
        v = self.frequency * (-s * x + c * y) + self.cross_phase
        out = np.empty(x.shape + (3,), dtype=np.float64)
        out[..., 0] = 0.5 + self.amplitude * np.sin(u)
        out[..., 1] = 0.5 + self.amplitude * np.cos(u)
        out[..., 2] = 0.5 + self.amplitude * np.sin(v)
        # Incommensurate low-amplitude detail: breaks the periodic
        # re-alignment of the carrier without spoiling its gradient floor.
        for ch in range(3):
            kx, ky = self.detail_vectors[ch]
            out[..., ch] += self.detail_amplitude * np.sin(kx * x + ky * y + self.detail_phases[ch])
        return out


@dataclass(frozen=True)
class TwoPlaneScene:
    cameras: list        # K input cameras
    images: list         # matching (H, W, 3) float32 images
    reference_camera: Camera  # rig-center camera over the evaluation grid
    heldout_camera: Camera
    heldout_image: np.ndarray
    background_depth: float
    foreground_depth: float
    square: tuple        # (x0, x1, y0, y1) world extent of the front square


def make_camera(width: int, height: int, focal: float, center) -> Camera:
    k = np.array([
        [focal, 0.0, (width - 1) / 2.0],
        [0.0, focal, (height - 1) / 2.0],
        [0.0, 0.0, 1.0],
    ])
    return Camera.from_center(k, np.eye(3), np.asarray(center, dtype=np.float64), width, height)


def render_two_plane_view(
    camera: Camera,
    background_depth: float,
    foreground_depth: float,
    square,
    bg_texture: PlanarTexture,
    fg_texture: PlanarTexture,
) -> np.ndarray:
    """Exact image of the scene from ``camera`` (rig cameras share rotation I)."""
    xs = np.arange(camera.width, dtype=np.float64)
    ys = np.arange(camera.height, dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys)
    k = camera.intrinsics
    dir_x = (gx - k[0, 2]) / k[0, 0]
    dir_y = (gy - k[1, 2]) / k[1, 1]
    cx, cy, cz = camera.center

    # Ray-plane hits for z = depth planes; rig cameras look straight down +z.
    fg_s = foreground_depth - cz
    fg_x = cx + fg_s * dir_x
    fg_y = cy + fg_s * dir_y
    x0, x1, y0, y1 = square
    hit_fg = (fg_x >= x0) & (fg_x <= x1) & (fg_y >= y0) & (fg_y <= y1)

    bg_s = background_depth - cz
    bg_x = cx + bg_s * dir_x
    bg_y = cy + bg_s * dir_y

    image = bg_texture.sample(bg_x, bg_y)
    image[hit_fg] = fg_texture.sample(fg_x, fg_y)[hit_fg]
    return image.astype(np.float32)


def two_plane_scene(
    seed: int = 0,
    width: int = 128,
    height: int = 128,
    focal: float = 110.0,
    baseline: float = 0.42,
    background_depth: float = 7.3,
    foreground_depth: float = 48.0 / 11.0,
    square_half: float = 0.45,
    texture_freq=(12.0, 16.0),
    source_margin: int = 18,
    heldout_offset=(0.05, -0.04),
) -> TwoPlaneScene:
    """2x2 input rig at z=0 plus a held-out off-center camera, shared rotation.

    Input views render ``source_margin`` extra pixels on every side so that
    every reference-grid ray stays inside every source image over the full
    depth range: plane sweeps then never touch the edge-clamp padding.
    """
    rng = np.random.default_rng(seed)
    bg_texture = PlanarTexture.random(rng, *texture_freq)
    fg_texture = PlanarTexture.random(rng, *texture_freq)
    square = (-square_half, square_half, -square_half, square_half)

    half = baseline / 2.0
    # Jitter breaks the exact rig symmetry so no wrong plane can re-align
    # every view at once.
    jitter = rng.uniform(-0.12, 0.12, size=(4, 2)) * baseline
    corners = np.array([(-half, -half), (half, -half), (-half, half), (half, half)])
    centers = [(cx, cy, 0.0) for cx, cy in corners + jitter]
    m = int(source_margin)
    cameras = [make_camera(width + 2 * m, height + 2 * m, focal, c) for c in centers]
    reference = make_camera(width, height, focal, (0.0, 0.0, 0.0))
    heldout = make_camera(
        width, height, focal, (heldout_offset[0], heldout_offset[1], 0.0)
    )

    def render(cam):
        return render_two_plane_view(
            cam, background_depth, foreground_depth, square, bg_texture, fg_texture
        )

    return TwoPlaneScene(
        cameras=cameras,
        images=[render(c) for c in cameras],
        reference_camera=reference,
        heldout_camera=heldout,
        heldout_image=render(heldout),
        background_depth=background_depth,
        foreground_depth=foreground_depth,
        square=square,
    )
