"""Compact and adaptive multiplane images.

Build MPIs from posed input views with a deterministic photo-consistency
heuristic, re-sample their depths to the scene, compact them by alpha
thresholding, render novel views, and serialize them bit-exactly.
"""

from .adaptive import (
    IntervalWeights,
    adapt_and_rebuild,
    adapt_depths,
    interval_weights,
    prune_depths,
    redistribute_depths,
)
from .backend import active_backend
from .compact import (
    SparsityReport,
    SweepCurve,
    SweepRecord,
    accumulated_alpha,
    min_accumulated_alpha,
    occupancy,
    occupancy_sweep,
    sparsity_excess,
    sparsity_loss,
    threshold_alpha,
    total_loss,
)
from .cues import CueVolume, Psv, TauMap, build_psv, compute_cues, tau_map, visibility_volume
from .geometry import (
    Camera,
    average_reference_camera,
    inverse_depth_samples,
    plane_homography,
    warp_image,
)
from .metrics import MetricReport, l1, metric_report, psnr, ssim, synthesis_error
from .mpi import (
    Mpi,
    Residual,
    composite_over,
    heuristic_residual,
    init_mpi,
    refine_step,
    render_view,
    warp_alpha_to_view,
)
from .pipeline import PipelineConfig, build_mpi, focal_stack, loss_report
from .store import (
    decode_mpi,
    encode_mpi,
    export_web_bundle,
    import_web_bundle,
    load_mpi,
    load_scene,
    save_mpi,
)

__version__ = "0.1.0"
