/** Camera math shared by the CPU and GPU render paths.
 *
 * Conventions match the bundle producer: right-handed frames, cameras look
 * down +z with x right and y down, extrinsics are world-to-camera
 * (x_cam = R x + t), pixels sit at integer coordinates, and fronto-parallel
 * planes live at z = depth in the reference camera frame.
 */

import type { CameraJson } from "./manifest.js";

export type Mat3 = Float64Array; // row-major 3x3
export type Vec3 = [number, number, number];

export interface Camera {
  intrinsics: Mat3;
  rotation: Mat3; // world-to-camera
  translation: Vec3;
  width: number;
  height: number;
}

export function mat3(...v: number[]): Mat3 {
  return Float64Array.from(v);
}

export const IDENTITY3: Mat3 = mat3(1, 0, 0, 0, 1, 0, 0, 0, 1);

export function matMul(a: Mat3, b: Mat3): Mat3 {
  const out = new Float64Array(9);
  for (let r = 0; r < 3; r++) {
    for (let c = 0; c < 3; c++) {
      out[3 * r + c] =
        a[3 * r] * b[c] + a[3 * r + 1] * b[3 + c] + a[3 * r + 2] * b[6 + c];
    }
  }
  return out;
}

export function matVec(a: Mat3, v: Vec3): Vec3 {
  return [
    a[0] * v[0] + a[1] * v[1] + a[2] * v[2],
    a[3] * v[0] + a[4] * v[1] + a[5] * v[2],
    a[6] * v[0] + a[7] * v[1] + a[8] * v[2],
  ];
}

export function transpose(a: Mat3): Mat3 {
  return mat3(a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]);
}

export function inverse3(a: Mat3): Mat3 {
  const [m00, m01, m02, m10, m11, m12, m20, m21, m22] = a;
  const c00 = m11 * m22 - m12 * m21;
  const c01 = m12 * m20 - m10 * m22;
  const c02 = m10 * m21 - m11 * m20;
  const det = m00 * c00 + m01 * c01 + m02 * c02;
  if (!Number.isFinite(det) || det === 0) {
    throw new Error("matrix is singular");
  }
  const inv = mat3(
    c00, m02 * m21 - m01 * m22, m01 * m12 - m02 * m11,
    c01, m00 * m22 - m02 * m20, m02 * m10 - m00 * m12,
    c02, m01 * m20 - m00 * m21, m00 * m11 - m01 * m10,
  );
  for (let i = 0; i < 9; i++) inv[i] /= det;
  return inv;
}

export function cameraFromJson(json: CameraJson): Camera {
  return {
    intrinsics: Float64Array.from(json.intrinsics),
    rotation: Float64Array.from(json.rotation),
    translation: [json.translation[0], json.translation[1], json.translation[2]],
    width: json.width,
    height: json.height,
  };
}

export function cameraCenter(cam: Camera): Vec3 {
  const rt = transpose(cam.rotation);
  const c = matVec(rt, cam.translation);
  return [-c[0], -c[1], -c[2]];
}

export function rotX(a: number): Mat3 {
  const c = Math.cos(a), s = Math.sin(a);
  return mat3(1, 0, 0, 0, c, -s, 0, s, c);
}

export function rotY(a: number): Mat3 {
  const c = Math.cos(a), s = Math.sin(a);
  return mat3(c, 0, s, 0, 1, 0, -s, 0, c);
}

/**
 * Pixel mapping from the reference view to a target view through the
 * fronto-parallel plane z_ref = depth:
 *
 *     H = K_t (R_rel + t_rel n^T / depth) K_r^-1,  n = (0, 0, 1)
 */
export function planeHomography(reference: Camera, target: Camera, depth: number): Mat3 {
  const rRel = matMul(target.rotation, transpose(reference.rotation));
  const rt = matVec(rRel, reference.translation);
  const tRel: Vec3 = [
    target.translation[0] - rt[0],
    target.translation[1] - rt[1],
    target.translation[2] - rt[2],
  ];
  const core = mat3(
    rRel[0], rRel[1], rRel[2] + tRel[0] / depth,
    rRel[3], rRel[4], rRel[5] + tRel[1] / depth,
    rRel[6], rRel[7], rRel[8] + tRel[2] / depth,
  );
  return matMul(target.intrinsics, matMul(core, inverse3(reference.intrinsics)));
}

export function applyHomography(h: Mat3, x: number, y: number): [number, number] {
  const w = h[6] * x + h[7] * y + h[8];
  return [(h[0] * x + h[1] * y + h[2]) / w, (h[3] * x + h[4] * y + h[5]) / w];
}
