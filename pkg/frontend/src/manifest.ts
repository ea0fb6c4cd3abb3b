/** Bundle manifest schema and validation. */

export interface CameraJson {
  intrinsics: number[]; // 9, row-major
  rotation: number[];   // 9, row-major, world-to-camera
  translation: number[];
  width: number;
  height: number;
}

export interface Manifest {
  version: number;
  dims: { depth: number; height: number; width: number };
  depths: number[];
  camera: CameraJson;
  atlas: { file: string; columns: number; rows: number };
}

export class BundleError extends Error {}

function expectNumbers(value: unknown, count: number, what: string): number[] {
  if (!Array.isArray(value) || value.length !== count || !value.every((v) => Number.isFinite(v))) {
    throw new BundleError(`${what} must be ${count} finite numbers`);
  }
  return value as number[];
}

function expectPositiveInt(value: unknown, what: string): number {
  if (typeof value !== "number" || !Number.isInteger(value) || value < 1) {
    throw new BundleError(`${what} must be a positive integer`);
  }
  return value;
}

export function validateManifest(raw: unknown): Manifest {
  if (typeof raw !== "object" || raw === null) {
    throw new BundleError("manifest must be a JSON object");
  }
  const m = raw as Record<string, unknown>;
  const dims = m.dims as Record<string, unknown> | undefined;
  if (!dims) throw new BundleError("manifest has no dims");
  const depth = expectPositiveInt(dims.depth, "dims.depth");
  const height = expectPositiveInt(dims.height, "dims.height");
  const width = expectPositiveInt(dims.width, "dims.width");

  const depths = expectNumbers(m.depths, depth, "depths");
  for (let i = 0; i < depths.length; i++) {
    if (depths[i] <= 0) throw new BundleError("depths must be positive");
    if (i > 0 && depths[i] >= depths[i - 1]) {
      throw new BundleError("depths must be strictly decreasing (back to front)");
    }
  }

  const cam = m.camera as Record<string, unknown> | undefined;
  if (!cam) throw new BundleError("manifest has no camera");
  const camera: CameraJson = {
    intrinsics: expectNumbers(cam.intrinsics, 9, "camera.intrinsics"),
    rotation: expectNumbers(cam.rotation, 9, "camera.rotation"),
    translation: expectNumbers(cam.translation, 3, "camera.translation"),
    width: expectPositiveInt(cam.width, "camera.width"),
    height: expectPositiveInt(cam.height, "camera.height"),
  };

  const atlas = m.atlas as Record<string, unknown> | undefined;
  if (!atlas || typeof atlas.file !== "string") {
    throw new BundleError("manifest has no atlas file");
  }
  const columns = expectPositiveInt(atlas.columns, "atlas.columns");
  const rows = expectPositiveInt(atlas.rows, "atlas.rows");
  if (columns * rows < depth) {
    throw new BundleError(
      `atlas grid ${columns}x${rows} cannot hold ${depth} planes`,
    );
  }

  return {
    version: typeof m.version === "number" ? m.version : 1,
    dims: { depth, height, width },
    depths,
    camera,
    atlas: { file: atlas.file, columns, rows },
  };
}
