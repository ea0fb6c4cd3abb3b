import numpy as np
import pytest

from mpiforge.geometry import Camera
from mpiforge.mpi import Mpi


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def random_camera(rng: np.random.Generator, width=None, height=None, rotation=None) -> Camera:
    width = int(width if width is not None else rng.integers(16, 64))
    height = int(height if height is not None else rng.integers(16, 64))
    f = rng.uniform(40.0, 160.0)
    k = np.array([
        [f, 0.0, (width - 1) / 2.0 + rng.uniform(-2, 2)],
        [0.0, f * rng.uniform(0.9, 1.1), (height - 1) / 2.0 + rng.uniform(-2, 2)],
        [0.0, 0.0, 1.0],
    ])
    if rotation is None:
        rotation = random_rotation(rng)
    center = rng.uniform(-1.0, 1.0, size=3)
    return Camera.from_center(k, rotation, center, width, height)


def frontal_camera(width=32, height=32, focal=60.0, center=(0.0, 0.0, 0.0)) -> Camera:
    k = np.array([
        [focal, 0.0, (width - 1) / 2.0],
        [0.0, focal, (height - 1) / 2.0],
        [0.0, 0.0, 1.0],
    ])
    return Camera.from_center(k, np.eye(3), np.asarray(center, float), width, height)


def rig_pair(rng: np.random.Generator):
    """Two cameras inducing the *same* physical plane for z = depth.

    Shared optical axis (an in-plane rotation is allowed) and a lateral
    center offset keep the fronto-parallel plane of one frame identical in
    the other, which is the regime where forward/backward plane
    homographies invert each other.
    """
    base_rot = random_rotation(rng)
    phi = rng.uniform(0, 2 * np.pi)
    rz = np.array([
        [np.cos(phi), -np.sin(phi), 0.0],
        [np.sin(phi), np.cos(phi), 0.0],
        [0.0, 0.0, 1.0],
    ])
    a = random_camera(rng, rotation=base_rot)
    b_center = a.center + a.rotation.T @ np.array([rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.0])
    k = random_camera(rng).intrinsics
    b = Camera.from_center(k, rz @ base_rot, b_center, a.width, a.height)
    return a, b


def random_mpi(rng: np.random.Generator, num_planes=None, width=None, height=None,
               masked=False) -> Mpi:
    d = int(num_planes if num_planes is not None else rng.integers(1, 6))
    camera = random_camera(rng, width=width, height=height)
    logits = rng.uniform(-5.0, 5.0, size=(d, camera.height, camera.width, 4))
    depths = np.sort(rng.uniform(0.5, 20.0, size=d))[::-1]
    while d > 1 and np.any(np.diff(depths) >= 0):
        depths = np.sort(rng.uniform(0.5, 20.0, size=d))[::-1]
    mask = rng.random(size=(d, camera.height, camera.width)) < 0.4 if masked else None
    return Mpi(logits, depths, camera, mask)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
