"""Sparsity objective, alpha-threshold compaction, and the occupancy sweep.

The sparsity measure charges each pixel for the accumulated alpha beyond
its allowed active-plane budget, and additionally penalizes pixels whose
accumulated alpha falls below 1 in any input view (disocclusion holes):

    excess = sum_x max(A(x) - tau(x), 0)
    loss   = excess / |pixels| + |min(A_min - 1, 0)|
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, InvalidRangeError, ShapeMismatchError
from .metrics import l1 as _l1
from .metrics import ssim as _ssim
from .mpi import Mpi, render_view, warp_alpha_to_view

THRESHOLD_MAX = 0.95


@dataclass(frozen=True)
class SparsityReport:
    accumulated_alpha: np.ndarray  # (H, W)
    excess: float
    a_min: float
    loss: float


@dataclass(frozen=True)
class SweepRecord:
    threshold: float
    occupancy: float
    ssim: float
    l1: float


@dataclass(frozen=True)
class SweepCurve:
    records: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("threshold,occupancy,ssim,l1\n")
        for r in self.records:
            buf.write(f"{r.threshold:.6f},{r.occupancy:.6f},{r.ssim:.6f},{r.l1:.6f}\n")
        return buf.getvalue()


def accumulated_alpha(mpi: Mpi) -> np.ndarray:
    """Per-pixel sum of materialized alphas over depth."""
    return mpi.alpha().astype(np.float64).sum(axis=0)


def sparsity_excess(a: np.ndarray, tau) -> float:
    """Total accumulated alpha beyond the per-pixel budget.

    Summed with compensated summation, so the result is the exactly
    rounded sum and independent of pixel order.
    """
    a = np.asarray(a, dtype=np.float64)
    tau_values = np.asarray(getattr(tau, "values", tau), dtype=np.float64)
    if a.shape != tau_values.shape:
        raise ShapeMismatchError(f"A is {a.shape}, tau is {tau_values.shape}")
    return math.fsum(np.maximum(a - tau_values, 0.0).ravel())


def min_accumulated_alpha(mpi: Mpi, input_cameras) -> float:
    """Minimum of A over the reference view and every input view.

    Input-view accumulations sum the alpha planes after warping them into
    that view's grid.
    """
    a_min = float(accumulated_alpha(mpi).min())
    for cam in input_cameras:
        warped = warp_alpha_to_view(mpi, cam).astype(np.float64).sum(axis=0)
        a_min = min(a_min, float(warped.min()))
    return a_min


def sparsity_loss(excess: float, a_min: float, pixel_count: int) -> float:
    """excess / pixel_count + |min(a_min - 1, 0)|."""
    if pixel_count <= 0:
        raise InvalidRangeError(f"pixel_count must be > 0, got {pixel_count}")
    return excess / pixel_count + abs(min(a_min - 1.0, 0.0))


def total_loss(synthesis_error: float, sparsity: float, lambda_weight: float = 0.1) -> float:
    """Synthesis error plus lambda-weighted sparsity."""
    if lambda_weight < 0:
        raise InvalidRangeError(f"lambda must be >= 0, got {lambda_weight}")
    return synthesis_error + lambda_weight * sparsity


def sparsity_report(mpi: Mpi, input_cameras, tau) -> SparsityReport:
    a = accumulated_alpha(mpi)
    excess = sparsity_excess(a, tau)
    a_min = min_accumulated_alpha(mpi, input_cameras)
    loss = sparsity_loss(excess, a_min, a.size)
    return SparsityReport(a, excess, a_min, loss)


def threshold_alpha(mpi: Mpi, threshold: float) -> Mpi:
    """Zero out (mask) every voxel whose materialized alpha is below ``threshold``.

    Masked voxels materialize as exact zeros; the operation is idempotent
    at a fixed threshold and monotone in it.
    """
    if not (0.0 <= threshold <= THRESHOLD_MAX):
        raise InvalidRangeError(
            f"threshold must lie in [0, {THRESHOLD_MAX}], got {threshold}"
        )
    new_mask = mpi.zero_mask | (mpi.alpha() < np.float32(threshold))
    return mpi.with_mask(new_mask)


def occupancy(mpi: Mpi) -> float:
    """Fraction of voxels with nonzero materialized alpha."""
    return float(np.count_nonzero(mpi.alpha() > 0)) / mpi.alpha().size


def occupancy_sweep(mpi: Mpi, gt_views, thresholds) -> SweepCurve:
    """Compact at each threshold, re-render every ground-truth pose, record quality.

    ``gt_views`` is a sequence of (camera, image) pairs; thresholds must be
    sorted ascending within [0, 0.95]. Occupancy is non-increasing along
    the curve by construction.
    """
    gt_views = list(gt_views)
    if not gt_views:
        raise EmptyInputError("occupancy sweep needs at least one ground-truth view")
    ts = [float(t) for t in thresholds]
    if not ts:
        raise EmptyInputError("occupancy sweep needs at least one threshold")
    if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
        raise InvalidRangeError("thresholds must be strictly ascending")
    if ts[0] < 0.0 or ts[-1] > THRESHOLD_MAX:
        raise InvalidRangeError(f"thresholds must lie in [0, {THRESHOLD_MAX}]")

    records = []
    for t in ts:
        compacted = threshold_alpha(mpi, t)
        ssim_sum = 0.0
        l1_sum = 0.0
        for cam, image in gt_views:
            rendered = render_view(compacted, cam)
            ssim_sum += _ssim(rendered, image)
            l1_sum += _l1(rendered, image)
        records.append(
            SweepRecord(
                threshold=t,
                occupancy=occupancy(compacted),
                ssim=ssim_sum / len(gt_views),
                l1=l1_sum / len(gt_views),
            )
        )
    return SweepCurve(tuple(records))
