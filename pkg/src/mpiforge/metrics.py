"""Image-quality metrics: SSIM, L1, PSNR, and the synthesis-error stand-in."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeMismatchError, ValidationError

# Rec.601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114])

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# PSNR is reported against an MSE floor of 1e-12 so identical images give a
# finite (120 dB) value that serializes as strict JSON.
_MSE_FLOOR = 1e-12


@dataclass(frozen=True)
class MetricReport:
    ssim: float
    l1: float
    psnr: float


def _gaussian_kernel(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _filter_valid(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable correlation keeping only fully covered window positions."""
    rows = sliding_window_view(img, kernel.size, axis=1) @ kernel
    return sliding_window_view(rows, kernel.size, axis=0) @ kernel


def _to_luma(image: np.ndarray) -> np.ndarray:
    a = np.asarray(image, dtype=np.float64)
    if a.ndim == 3 and a.shape[2] == 3:
        return a @ _LUMA
    if a.ndim == 2:
        return a
    raise ShapeMismatchError(f"expected (H, W) or (H, W, 3) image, got {a.shape}")


def _check_pair(a: np.ndarray, b: np.ndarray):
    if np.asarray(a).shape != np.asarray(b).shape:
        raise ShapeMismatchError(
            f"image shapes differ: {np.asarray(a).shape} vs {np.asarray(b).shape}"
        )


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Single-scale SSIM on luma, 11x11 Gaussian window (sigma 1.5).

    Dynamic range is 1.0 (inputs in [0, 1]); only window positions fully
    inside the image contribute, and the final mean uses compensated
    summation so the score is independent of evaluation order.
    """
    _check_pair(a, b)
    x = _to_luma(a)
    y = _to_luma(b)
    if min(x.shape) < SSIM_WINDOW:
        raise ValidationError(
            f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM, got {x.shape}"
        )
    kernel = _gaussian_kernel()
    mu_x = _filter_valid(x, kernel)
    mu_y = _filter_valid(y, kernel)
    xx = _filter_valid(x * x, kernel) - mu_x * mu_x
    yy = _filter_valid(y * y, kernel) - mu_y * mu_y
    xy = _filter_valid(x * y, kernel) - mu_x * mu_y

    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    ssim_map = ((2 * mu_x * mu_y + c1) * (2 * xy + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (xx + yy + c2)
    )
    return math.fsum(ssim_map.ravel()) / ssim_map.size


def l1(a: np.ndarray, b: np.ndarray) -> float:
    _check_pair(a, b)
    return float(
        np.mean(np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)))
    )


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for unit dynamic range."""
    _check_pair(a, b)
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    mse = float(np.mean(diff * diff))
    return 10.0 * math.log10(1.0 / max(mse, _MSE_FLOOR))


def synthesis_error(rendered: np.ndarray, gt: np.ndarray) -> float:
    """Mean absolute error plus (1 - SSIM)/2.

    A cheap rendering-quality score used where a perceptual feature
    distance would need a pretrained network.
    """
    return l1(rendered, gt) + (1.0 - ssim(rendered, gt)) / 2.0


def metric_report(a: np.ndarray, b: np.ndarray) -> MetricReport:
    return MetricReport(ssim=ssim(a, b), l1=l1(a, b), psnr=psnr(a, b))
