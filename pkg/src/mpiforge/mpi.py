"""The multiplane-image container and its rendering/refinement operations.

An ``Mpi`` is a stack of D fronto-parallel RGBA planes at strictly
decreasing depths relative to a reference camera, index 0 farthest. The
state lives in pre-activation (logit) space; ``values()`` materializes the
[0, 1] view as float32. Keeping the state pre-activation makes a zero
residual an exact fixed point of the update
``new_state = old_state + residual``.

Compacted voxels are tracked by an explicit ``zero_mask``: masked voxels
materialize as exact zeros in all four channels, which keeps occupancy
counting and serialization bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import backend
from .errors import NumericError, ShapeMismatchError, ValidationError
from .geometry import Camera, as_depth_list, plane_homography, warp_image

# Clamp for converting [0, 1] values to finite logits.
VALUE_EPS = 1e-3

# Logit magnitude that saturates to exactly 0.0 / 1.0 in float32.
_SATURATED_LOGIT = 745.0


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable elementwise logistic function."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def logit(p: np.ndarray) -> np.ndarray:
    """Inverse of ``sigmoid`` for p in (0, 1)."""
    p = np.asarray(p, dtype=np.float64)
    return np.log(p) - np.log1p(-p)


def values_to_logits(values: np.ndarray, eps: float = VALUE_EPS) -> np.ndarray:
    """Finite logits for [0, 1] values, clamping away from the endpoints."""
    return logit(np.clip(np.asarray(values, dtype=np.float64), eps, 1.0 - eps))


@dataclass(frozen=True)
class Mpi:
    """D ordered RGBA planes in logit space, plus depths and reference camera."""

    logits: np.ndarray          # (D, H, W, 4) float64
    depths: np.ndarray          # (D,) float64, strictly decreasing
    reference: Camera
    zero_mask: np.ndarray = field(default=None)  # (D, H, W) bool

    def __post_init__(self):
        logits = np.asarray(self.logits, dtype=np.float64)
        if logits.ndim != 4 or logits.shape[3] != 4:
            raise ShapeMismatchError(f"logits must be (D, H, W, 4), got {logits.shape}")
        if not np.isfinite(logits).all():
            raise NumericError("logits must be finite")
        depths = as_depth_list(self.depths)
        d, h, w, _ = logits.shape
        if depths.size != d:
            raise ShapeMismatchError(f"{depths.size} depths for {d} planes")
        if (self.reference.height, self.reference.width) != (h, w):
            raise ValidationError(
                f"reference camera is {self.reference.height}x{self.reference.width}, "
                f"planes are {h}x{w}"
            )
        mask = self.zero_mask
        if mask is None:
            mask = np.zeros((d, h, w), dtype=bool)
        else:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != (d, h, w):
                raise ShapeMismatchError(f"zero_mask must be (D, H, W), got {mask.shape}")
        object.__setattr__(self, "logits", logits)
        object.__setattr__(self, "depths", depths)
        object.__setattr__(self, "zero_mask", mask)

    @property
    def num_planes(self) -> int:
        return self.logits.shape[0]

    @property
    def height(self) -> int:
        return self.logits.shape[1]

    @property
    def width(self) -> int:
        return self.logits.shape[2]

    @cached_property
    def _values(self) -> np.ndarray:
        vals = sigmoid(self.logits).astype(np.float32)
        vals[self.zero_mask] = 0.0
        vals.setflags(write=False)
        return vals

    def values(self) -> np.ndarray:
        """Materialized (D, H, W, 4) float32 view in [0, 1]; read-only."""
        return self._values

    def alpha(self) -> np.ndarray:
        """Materialized (D, H, W) alpha volume."""
        return self._values[..., 3]

    def with_logits(self, logits: np.ndarray) -> "Mpi":
        return Mpi(logits, self.depths, self.reference, self.zero_mask)

    def with_mask(self, zero_mask: np.ndarray) -> "Mpi":
        return Mpi(self.logits, self.depths, self.reference, zero_mask)


@dataclass(frozen=True)
class Residual:
    """Additive logit-space update, same dims as the MPI it refines."""

    values: np.ndarray  # (D, H, W, 4) float64


def init_mpi(mean_colors: np.ndarray, depths, reference: Camera) -> Mpi:
    """Initial MPI: colors from the focal stack, transparent volume, opaque back plane.

    ``mean_colors`` is (D, H, W, 3) in [0, 1]. Alpha starts at the clamp
    value everywhere except plane 0 (farthest), which starts opaque.
    """
    colors = np.asarray(mean_colors, dtype=np.float64)
    depths = as_depth_list(depths)
    if colors.ndim != 4 or colors.shape[3] != 3 or colors.shape[0] != depths.size:
        raise ShapeMismatchError(
            f"mean_colors must be ({depths.size}, H, W, 3), got {colors.shape}"
        )
    if colors.size and (colors.min() < 0 or colors.max() > 1):
        raise ValidationError("mean_colors must lie in [0, 1]")
    d, h, w, _ = colors.shape
    logits = np.empty((d, h, w, 4), dtype=np.float64)
    logits[..., :3] = values_to_logits(colors)
    logits[..., 3] = logit(VALUE_EPS)
    logits[0, ..., 3] = logit(1.0 - VALUE_EPS)
    return Mpi(logits, depths, reference)


def composite_over(mpi: Mpi) -> np.ndarray:
    """Render the MPI at its reference pose (no warping): back-to-front over.

    out = sum_d c_d * a_d * prod_{j>d} (1 - a_j), planes j > d nearer.
    """
    return backend.composite_over_values(mpi.values())


def _warped_plane_stack(mpi: Mpi, target: Camera) -> np.ndarray:
    vals = mpi.values()
    out = np.empty((mpi.num_planes, target.height, target.width, 4), dtype=np.float32)
    for d in range(mpi.num_planes):
        h = plane_homography(mpi.reference, target, mpi.depths[d])
        out[d] = warp_image(vals[d], h, target.width, target.height)
    return out


def render_view(mpi: Mpi, target: Camera) -> np.ndarray:
    """Warp every plane to ``target`` at its depth, then composite.

    Color and alpha are warped independently (no premultiplication).
    """
    return backend.composite_over_values(_warped_plane_stack(mpi, target))


def warp_alpha_to_view(mpi: Mpi, view: Camera) -> np.ndarray:
    """Each alpha plane resampled onto the view's grid at its own depth."""
    vals = mpi.values()
    out = np.empty((mpi.num_planes, view.height, view.width), dtype=np.float32)
    for d in range(mpi.num_planes):
        h = plane_homography(mpi.reference, view, mpi.depths[d])
        out[d] = warp_image(vals[d, :, :, 3], h, view.width, view.height)
    return out


def refine_step(mpi: Mpi, cues, residual_fn) -> Mpi:
    """One iterative update: add the residual in logit space.

    ``residual_fn(cues, mpi)`` must return a ``Residual`` matching the MPI
    dimensions; a zero residual leaves the logits bit-identical.
    """
    residual = residual_fn(cues, mpi)
    r = np.asarray(residual.values, dtype=np.float64)
    if r.shape != mpi.logits.shape:
        raise ShapeMismatchError(
            f"residual shape {r.shape} does not match MPI {mpi.logits.shape}"
        )
    if not np.isfinite(r).all():
        raise NumericError("residual contains non-finite values")
    return mpi.with_logits(mpi.logits + r)


def heuristic_residual(
    cues,
    mpi: Mpi,
    gain: float = 4.0,
    variance_scale: float = 0.01,
    bias: float = 0.5,
    color_rate: float = 0.5,
) -> Residual:
    """Deterministic photo-consistency residual.

    Alpha logits grow where the visible color variance is low and the
    total visibility is high, and shrink elsewhere:

        d_alpha = gain * (exp(-variance / variance_scale) * v / K - bias)

    Color logits move toward the (clamped) mean visible color at
    ``color_rate`` per step.
    """
    k = float(cues.view_count)
    consistency = np.exp(-cues.color_variance / variance_scale)
    d_alpha = gain * (consistency * cues.total_visibility / k - bias)
    target = values_to_logits(np.clip(cues.mean_color, 0.0, 1.0))
    d_color = color_rate * (target - mpi.logits[..., :3])
    out = np.empty_like(mpi.logits)
    out[..., :3] = d_color
    out[..., 3] = d_alpha
    return Residual(out)
