/** Atlas unpacking: the bundle packs plane d at grid cell
 * (row, col) = divmod(d, columns), row-major, each cell H x W RGBA.
 */

import { BundleError, Manifest } from "./manifest.js";

export interface PlaneRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

export function planeRect(manifest: Manifest, plane: number): PlaneRect {
  const { depth, height, width } = manifest.dims;
  if (plane < 0 || plane >= depth) {
    throw new BundleError(`plane ${plane} out of range (D=${depth})`);
  }
  const col = plane % manifest.atlas.columns;
  const row = Math.floor(plane / manifest.atlas.columns);
  return { x: col * width, y: row * height, width, height };
}

export function checkAtlasSize(manifest: Manifest, atlasWidth: number, atlasHeight: number): void {
  const expectedW = manifest.atlas.columns * manifest.dims.width;
  const expectedH = manifest.atlas.rows * manifest.dims.height;
  if (atlasWidth !== expectedW || atlasHeight !== expectedH) {
    throw new BundleError(
      `atlas is ${atlasWidth}x${atlasHeight}, manifest expects ${expectedW}x${expectedH}`,
    );
  }
}

/** Copy one plane out of tightly packed RGBA atlas pixels. */
export function extractPlane(
  manifest: Manifest,
  atlasRgba: Uint8Array,
  atlasWidth: number,
  plane: number,
): Uint8Array {
  const rect = planeRect(manifest, plane);
  const out = new Uint8Array(rect.width * rect.height * 4);
  for (let y = 0; y < rect.height; y++) {
    const src = ((rect.y + y) * atlasWidth + rect.x) * 4;
    out.set(atlasRgba.subarray(src, src + rect.width * 4), y * rect.width * 4);
  }
  return out;
}
