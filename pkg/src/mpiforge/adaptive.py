"""Scene-adapted depth sampling.

Depths whose alpha plane never reaches a floor anywhere are discarded, the
surviving depth intervals are weighted by the spatial mean alpha of their
endpoint planes, and the freed plane budget is re-spent inside the
heaviest intervals, regularly spaced in inverse depth. The MPI is then
rebuilt from scratch on the new depth list. Inference-time only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidRangeError, MembershipError, ValidationError
from .geometry import as_depth_list
from .mpi import Mpi

ALPHA_FLOOR = 0.3


@dataclass(frozen=True)
class IntervalWeights:
    """Kept depths plus per-plane and per-interval weights.

    interval_weights[i] averages the plane weights of the interval's two
    endpoints (kept_depths[i] is the farther endpoint).
    """

    kept_depths: np.ndarray      # (D',) strictly decreasing
    plane_weights: np.ndarray    # (D',) spatial mean alpha
    interval_weights: np.ndarray  # (D'-1,)


def prune_depths(mpi: Mpi, alpha_floor: float = ALPHA_FLOOR):
    """Drop depths whose alpha plane stays below ``alpha_floor`` at every pixel.

    Returns (kept depths back-to-front, removed count). At least the two
    planes with the highest alpha maxima always survive so that depth
    intervals remain well-defined.
    """
    plane_max = mpi.alpha().reshape(mpi.num_planes, -1).max(axis=1)
    keep = plane_max >= alpha_floor
    if keep.sum() < 2:
        # Highest maxima win; ties resolve to the lower plane index.
        order = np.lexsort((np.arange(plane_max.size), -plane_max))
        keep = np.zeros_like(keep)
        keep[order[:2]] = True
    kept = mpi.depths[keep]
    return kept, int(mpi.num_planes - kept.size)


def interval_weights(mpi: Mpi, kept) -> IntervalWeights:
    """Spatial-mean-alpha weights for the kept planes and their intervals."""
    kept = as_depth_list(kept, min_planes=2)
    indices = []
    for d in kept:
        hits = np.flatnonzero(mpi.depths == d)
        if hits.size == 0:
            raise MembershipError(f"depth {d} is not a plane of this MPI")
        indices.append(hits[0])
    plane_w = np.array(
        [float(mpi.alpha()[i].mean(dtype=np.float64)) for i in indices], dtype=np.float64
    )
    interval_w = (plane_w[:-1] + plane_w[1:]) / 2.0
    return IntervalWeights(kept, plane_w, interval_w)


def _allocate(weights: np.ndarray, count: int) -> np.ndarray:
    """Largest-remainder allocation of ``count`` items proportional to weights.

    Ties prefer the nearer interval (larger index). Degenerate all-zero
    weights fall back to a uniform split.
    """
    w = np.asarray(weights, dtype=np.float64)
    total = w.sum()
    if total <= 0:
        w = np.ones_like(w)
        total = w.sum()
    quota = count * w / total
    base = np.floor(quota).astype(np.int64)
    short = count - int(base.sum())
    if short > 0:
        remainder = quota - base
        order = np.lexsort((-np.arange(w.size), -remainder))
        base[order[:short]] += 1
    return base


def redistribute_depths(weights: IntervalWeights, removed_count: int) -> np.ndarray:
    """Spend the removed plane budget inside the weighted intervals.

    Each interval receiving m planes gets them at m uniformly spaced
    *interior* inverse-depth positions (endpoints excluded, so kept depths
    are preserved exactly and never duplicated). The result merges kept and
    new depths back-to-front.
    """
    if removed_count < 0:
        raise InvalidRangeError(f"removed_count must be >= 0, got {removed_count}")
    kept = weights.kept_depths
    if removed_count == 0:
        return kept.copy()
    counts = _allocate(weights.interval_weights, removed_count)
    new_depths = []
    for i, m in enumerate(counts):
        if m == 0:
            continue
        inv_far = 1.0 / kept[i]       # smaller reciprocal (farther endpoint)
        inv_near = 1.0 / kept[i + 1]
        steps = (np.arange(1, m + 1, dtype=np.float64)) / (m + 1)
        new_depths.extend(1.0 / (inv_far + steps * (inv_near - inv_far)))
    merged = np.concatenate([kept, np.array(new_depths, dtype=np.float64)])
    merged[::-1].sort()
    if np.unique(merged).size != merged.size:
        raise ValidationError("depth redistribution produced duplicate depths")
    return merged


def adapt_depths(probe: Mpi, alpha_floor: float = ALPHA_FLOOR) -> np.ndarray:
    """Prune + weight + redistribute, from an already-refined probe MPI."""
    kept, removed = prune_depths(probe, alpha_floor)
    weights = interval_weights(probe, kept)
    return redistribute_depths(weights, removed)


def adapt_and_rebuild(cameras, images, initial_depths, steps: int, **kwargs) -> Mpi:
    """Full scene-adapted build: probe, re-sample depths, rebuild from scratch.

    Runs the iterative builder on ``initial_depths`` to expose the scene
    geometry, adapts the depth list from the probe's alpha, then recomputes
    the PSVs and reruns the whole pipeline (initialization included) for
    ``steps`` iterations on the adapted depths.

    ``probe_steps`` controls the probe refinement length and defaults to
    ``steps``: the additive heuristic moves alpha logits by at most
    gain * (1 - bias) per iteration, so a single iteration cannot lift any
    plane past the prune floor.
    """
    from . import pipeline

    if steps < 1:
        raise InvalidRangeError(f"steps must be >= 1, got {steps}")
    alpha_floor = kwargs.pop("alpha_floor", ALPHA_FLOOR)
    probe_steps = kwargs.pop("probe_steps", None) or steps
    initial_depths = as_depth_list(initial_depths, min_planes=2)

    probe = pipeline.build_mpi(cameras, images, depths=initial_depths, steps=probe_steps, **kwargs)
    adapted = adapt_depths(probe, alpha_floor)
    return pipeline.build_mpi(cameras, images, depths=adapted, steps=steps, **kwargs)
