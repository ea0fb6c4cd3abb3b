/** Viewer state: manifest, clamped virtual pose, threshold, overlay toggle. */

import {
  Camera,
  Mat3,
  Vec3,
  cameraCenter,
  cameraFromJson,
  matMul,
  matVec,
  rotX,
  rotY,
  transpose,
} from "./camera.js";
import type { Manifest } from "./manifest.js";

export interface Pose {
  yaw: number;     // orbit about the vertical axis, radians
  pitch: number;   // orbit about the horizontal axis, radians
  lateralX: number; // sideways offset in reference-camera units
  lateralY: number;
  dolly: number;   // toward (+) / away from (-) the pivot
}

export interface PoseBounds {
  maxYaw: number;
  maxPitch: number;
  maxLateral: number;
  maxDolly: number;
}

export interface ViewerState {
  manifest: Manifest;
  reference: Camera;
  pivotDistance: number;
  bounds: PoseBounds;
  pose: Pose;
  threshold: number; // alpha cutoff in [0, 0.95]
  showStats: boolean;
}

export const THRESHOLD_MAX = 0.95;

export const IDENTITY_POSE: Pose = {
  yaw: 0, pitch: 0, lateralX: 0, lateralY: 0, dolly: 0,
};

const clamp = (v: number, lo: number, hi: number) => Math.min(Math.max(v, lo), hi);

export function defaultBounds(manifest: Manifest): PoseBounds {
  // Keep the virtual camera inside a baseline box scaled to the scene:
  // lateral play of ~6% of the pivot distance, gentle rotations.
  const pivot = pivotDistance(manifest);
  return {
    maxYaw: 0.2,
    maxPitch: 0.2,
    maxLateral: 0.06 * pivot,
    maxDolly: 0.15 * pivot,
  };
}

export function pivotDistance(manifest: Manifest): number {
  // Harmonic mean of the plane depths: the disparity midpoint.
  const invSum = manifest.depths.reduce((acc, d) => acc + 1 / d, 0);
  return manifest.depths.length / invSum;
}

export function clampPose(pose: Pose, bounds: PoseBounds): Pose {
  return {
    yaw: clamp(pose.yaw, -bounds.maxYaw, bounds.maxYaw),
    pitch: clamp(pose.pitch, -bounds.maxPitch, bounds.maxPitch),
    lateralX: clamp(pose.lateralX, -bounds.maxLateral, bounds.maxLateral),
    lateralY: clamp(pose.lateralY, -bounds.maxLateral, bounds.maxLateral),
    dolly: clamp(pose.dolly, -bounds.maxDolly, bounds.maxDolly),
  };
}

export function poseWithinBounds(pose: Pose, bounds: PoseBounds): boolean {
  return (
    Math.abs(pose.yaw) <= bounds.maxYaw &&
    Math.abs(pose.pitch) <= bounds.maxPitch &&
    Math.abs(pose.lateralX) <= bounds.maxLateral &&
    Math.abs(pose.lateralY) <= bounds.maxLateral &&
    Math.abs(pose.dolly) <= bounds.maxDolly
  );
}

export function clampThreshold(t: number): number {
  return clamp(t, 0, THRESHOLD_MAX);
}

export function createState(manifest: Manifest): ViewerState {
  return {
    manifest,
    reference: cameraFromJson(manifest.camera),
    pivotDistance: pivotDistance(manifest),
    bounds: defaultBounds(manifest),
    pose: { ...IDENTITY_POSE },
    threshold: 0,
    showStats: false,
  };
}

/**
 * Virtual camera for a pose: orbit about the pivot point on the reference
 * optical axis, then offset laterally and dolly along the view direction.
 * The identity pose reproduces the reference camera exactly.
 */
export function poseCamera(state: ViewerState): Camera {
  const ref = state.reference;
  const { yaw, pitch, lateralX, lateralY, dolly } = state.pose;
  const camToWorldRef = transpose(ref.rotation);
  const orbit: Mat3 = matMul(rotY(yaw), rotX(pitch));
  const camToWorld = matMul(camToWorldRef, orbit);

  const refCenter = cameraCenter(ref);
  const pivotCam: Vec3 = [0, 0, state.pivotDistance];
  const pivotWorld = matVec(camToWorldRef, pivotCam);
  const pivot: Vec3 = [
    refCenter[0] + pivotWorld[0],
    refCenter[1] + pivotWorld[1],
    refCenter[2] + pivotWorld[2],
  ];

  const backOff = state.pivotDistance - dolly;
  const offsetCam: Vec3 = [lateralX, lateralY, -backOff];
  const offsetWorld = matVec(camToWorld, offsetCam);
  const center: Vec3 = [
    pivot[0] + offsetWorld[0],
    pivot[1] + offsetWorld[1],
    pivot[2] + offsetWorld[2],
  ];

  const rotation = transpose(camToWorld);
  const t = matVec(rotation, center);
  return {
    intrinsics: ref.intrinsics,
    rotation,
    translation: [-t[0], -t[1], -t[2]],
    width: ref.width,
    height: ref.height,
  };
}
