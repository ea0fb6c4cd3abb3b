"""Pure-numpy reference implementations of the hot kernels.

Selected via ``MPIFORGE_BACKEND=numpy``; also the fallback when numba is
unavailable. Interpolation and compositing arithmetic runs in float64
regardless of backend so both paths agree to the last few ulps.
"""

import numpy as np


def warp_bilinear(src: np.ndarray, hinv: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Inverse-map each output pixel through ``hinv`` and sample bilinearly.

    ``src`` is (H, W, C) float32; out-of-bounds locations clamp to the
    nearest edge pixel.
    """
    h_src, w_src, _ = src.shape
    xs = np.arange(out_w, dtype=np.float64)
    ys = np.arange(out_h, dtype=np.float64)
    gx, gy = np.meshgrid(xs, ys)

    px = hinv[0, 0] * gx + hinv[0, 1] * gy + hinv[0, 2]
    py = hinv[1, 0] * gx + hinv[1, 1] * gy + hinv[1, 2]
    pw = hinv[2, 0] * gx + hinv[2, 1] * gy + hinv[2, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        sx = px / pw
        sy = py / pw
    sx = np.nan_to_num(sx, nan=0.0)
    sy = np.nan_to_num(sy, nan=0.0)
    sx = np.clip(sx, 0.0, w_src - 1.0)
    sy = np.clip(sy, 0.0, h_src - 1.0)

    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0
    x1 = np.minimum(x0 + 1, w_src - 1)
    y1 = np.minimum(y0 + 1, h_src - 1)

    v00 = src[y0, x0].astype(np.float64)
    v01 = src[y0, x1].astype(np.float64)
    v10 = src[y1, x0].astype(np.float64)
    v11 = src[y1, x1].astype(np.float64)

    fx = fx[..., None]
    fy = fy[..., None]
    top = v00 * (1.0 - fx) + v01 * fx
    bot = v10 * (1.0 - fx) + v11 * fx
    return (top * (1.0 - fy) + bot * fy).astype(np.float32)


def suffix_transmittance(alpha: np.ndarray) -> np.ndarray:
    """S[d] = prod over strictly nearer planes j > d of (1 - alpha[j])."""
    d_count = alpha.shape[0]
    b = 1.0 - alpha.astype(np.float64)
    s = np.empty_like(b)
    s[d_count - 1] = 1.0
    if d_count > 1:
        cp = np.cumprod(b[::-1], axis=0)
        s[: d_count - 1] = cp[d_count - 2 :: -1]
    return s


def composite_over_values(values: np.ndarray) -> np.ndarray:
    """Back-to-front over operator on a (D, H, W, 4) stack of [0,1] planes."""
    v = values.astype(np.float64)
    alpha = v[..., 3]
    weights = alpha * suffix_transmittance(alpha)
    return np.einsum("dhw,dhwc->hwc", weights, v[..., :3])
