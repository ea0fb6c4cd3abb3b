"""Numba-compiled versions of the hot kernels.

Same contracts as ``_kernels_numpy``; per-pixel loops parallelized over
rows. Each output element depends only on its own inputs, so results are
independent of the thread count.
"""

import numba
import numpy as np


@numba.njit(cache=True, parallel=True)
def warp_bilinear(src, hinv, out_h, out_w):
    h_src, w_src, channels = src.shape
    out = np.empty((out_h, out_w, channels), dtype=np.float32)
    for oy in numba.prange(out_h):
        for ox in range(out_w):
            px = hinv[0, 0] * ox + hinv[0, 1] * oy + hinv[0, 2]
            py = hinv[1, 0] * ox + hinv[1, 1] * oy + hinv[1, 2]
            pw = hinv[2, 0] * ox + hinv[2, 1] * oy + hinv[2, 2]
            sx = px / pw
            sy = py / pw
            if sx != sx:  # NaN from 0/0
                sx = 0.0
            if sy != sy:
                sy = 0.0
            sx = min(max(sx, 0.0), w_src - 1.0)
            sy = min(max(sy, 0.0), h_src - 1.0)
            x0 = int(np.floor(sx))
            y0 = int(np.floor(sy))
            fx = sx - x0
            fy = sy - y0
            x1 = min(x0 + 1, w_src - 1)
            y1 = min(y0 + 1, h_src - 1)
            for c in range(channels):
                top = src[y0, x0, c] * (1.0 - fx) + src[y0, x1, c] * fx
                bot = src[y1, x0, c] * (1.0 - fx) + src[y1, x1, c] * fx
                out[oy, ox, c] = np.float32(top * (1.0 - fy) + bot * fy)
    return out


@numba.njit(cache=True, parallel=True)
def suffix_transmittance(alpha):
    d_count, h, w = alpha.shape
    s = np.empty((d_count, h, w), dtype=np.float64)
    for y in numba.prange(h):
        for x in range(w):
            acc = 1.0
            for d in range(d_count - 1, -1, -1):
                s[d, y, x] = acc
                acc *= 1.0 - np.float64(alpha[d, y, x])
    return s


@numba.njit(cache=True, parallel=True)
def composite_over_values(values):
    d_count, h, w, _ = values.shape
    out = np.empty((h, w, 3), dtype=np.float64)
    for y in numba.prange(h):
        for x in range(w):
            t = 1.0
            r = 0.0
            g = 0.0
            b = 0.0
            for d in range(d_count - 1, -1, -1):
                a = np.float64(values[d, y, x, 3])
                wgt = t * a
                r += wgt * values[d, y, x, 0]
                g += wgt * values[d, y, x, 1]
                b += wgt * values[d, y, x, 2]
                t *= 1.0 - a
            out[y, x, 0] = r
            out[y, x, 1] = g
            out[y, x, 2] = b
    return out
