/** CPU reference renderer.
 *
 * Mirrors the producer's render path exactly: every plane is warped from
 * the reference grid into the target view through its plane homography
 * (inverse mapping, bilinear sampling, edge clamp), alpha below the
 * threshold is discarded, and the stack is composited back to front with
 * the over operator. Used by the test suite for pixel parity against the
 * CLI renderer and as the fallback when WebGL is unavailable.
 */

import { extractPlane } from "./atlas.js";
import { applyHomography, Camera, inverse3, Mat3, planeHomography } from "./camera.js";
import type { Manifest } from "./manifest.js";

export interface PlaneStack {
  manifest: Manifest;
  /** Per-plane RGBA pixels, H x W, values in [0, 255]. */
  planes: Uint8Array[];
}

export function stackFromAtlas(
  manifest: Manifest,
  atlasRgba: Uint8Array,
  atlasWidth: number,
): PlaneStack {
  const planes: Uint8Array[] = [];
  for (let d = 0; d < manifest.dims.depth; d++) {
    planes.push(extractPlane(manifest, atlasRgba, atlasWidth, d));
  }
  return { manifest, planes };
}

function samplePlane(
  plane: Uint8Array,
  width: number,
  height: number,
  x: number,
  y: number,
  out: Float64Array,
): void {
  let sx = x, sy = y;
  if (Number.isNaN(sx)) sx = 0;
  if (Number.isNaN(sy)) sy = 0;
  sx = Math.min(Math.max(sx, 0), width - 1);
  sy = Math.min(Math.max(sy, 0), height - 1);
  const x0 = Math.floor(sx), y0 = Math.floor(sy);
  const x1 = Math.min(x0 + 1, width - 1), y1 = Math.min(y0 + 1, height - 1);
  const fx = sx - x0, fy = sy - y0;
  const i00 = (y0 * width + x0) * 4;
  const i01 = (y0 * width + x1) * 4;
  const i10 = (y1 * width + x0) * 4;
  const i11 = (y1 * width + x1) * 4;
  for (let c = 0; c < 4; c++) {
    const top = plane[i00 + c] * (1 - fx) + plane[i01 + c] * fx;
    const bot = plane[i10 + c] * (1 - fx) + plane[i11 + c] * fx;
    out[c] = (top * (1 - fy) + bot * fy) / 255;
  }
}

/** Render the plane stack into the target view; returns H x W x 3 floats in [0, 1]. */
export function renderStack(
  stack: PlaneStack,
  reference: Camera,
  target: Camera,
  threshold: number,
): Float64Array {
  const { width: w, height: h } = target;
  const refW = stack.manifest.dims.width;
  const refH = stack.manifest.dims.height;
  const out = new Float64Array(w * h * 3);
  const inverses: Mat3[] = stack.manifest.depths.map((depth) =>
    inverse3(planeHomography(reference, target, depth)),
  );
  const rgba = new Float64Array(4);

  for (let d = 0; d < stack.planes.length; d++) {
    // back to front: plane 0 is farthest
    const hinv = inverses[d];
    const plane = stack.planes[d];
    for (let y = 0; y < h; y++) {
      for (let x = 0; x < w; x++) {
        const [sx, sy] = applyHomography(hinv, x, y);
        samplePlane(plane, refW, refH, sx, sy, rgba);
        let a = rgba[3];
        if (a < threshold) a = 0;
        if (a === 0) continue;
        const i = (y * w + x) * 3;
        out[i] = rgba[0] * a + out[i] * (1 - a);
        out[i + 1] = rgba[1] * a + out[i + 1] * (1 - a);
        out[i + 2] = rgba[2] * a + out[i + 2] * (1 - a);
      }
    }
  }
  return out;
}

export function toBytes(rgb: Float64Array): Uint8Array {
  const out = new Uint8Array(rgb.length);
  for (let i = 0; i < rgb.length; i++) {
    out[i] = Math.round(Math.min(Math.max(rgb[i], 0), 1) * 255);
  }
  return out;
}
