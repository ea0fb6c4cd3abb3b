/** Pure input handling: each event maps the current state to the next one.
 *
 * Drag orbits, shift-drag translates laterally, the wheel dollies, the
 * slider sets the alpha threshold. Everything is clamped, so no input
 * sequence can leave the configured pose box.
 */

import { ViewerState, clampPose, clampThreshold } from "./state.js";

export type ViewerEvent =
  | { kind: "drag"; dx: number; dy: number; shift: boolean }
  | { kind: "wheel"; delta: number }
  | { kind: "threshold"; value: number }
  | { kind: "toggle-stats" }
  | { kind: "reset" };

export const ORBIT_SPEED = 0.005;   // radians per pixel
export const LATERAL_SPEED = 0.002; // reference units per pixel
export const DOLLY_SPEED = 0.001;   // reference units per wheel delta

export function handleInput(state: ViewerState, event: ViewerEvent): ViewerState {
  switch (event.kind) {
    case "drag": {
      if (event.dx === 0 && event.dy === 0) return state;
      const pose = { ...state.pose };
      if (event.shift) {
        pose.lateralX += event.dx * LATERAL_SPEED;
        pose.lateralY += event.dy * LATERAL_SPEED;
      } else {
        pose.yaw += event.dx * ORBIT_SPEED;
        pose.pitch += event.dy * ORBIT_SPEED;
      }
      return { ...state, pose: clampPose(pose, state.bounds) };
    }
    case "wheel": {
      const pose = { ...state.pose, dolly: state.pose.dolly - event.delta * DOLLY_SPEED };
      return { ...state, pose: clampPose(pose, state.bounds) };
    }
    case "threshold":
      return { ...state, threshold: clampThreshold(event.value) };
    case "toggle-stats":
      return { ...state, showStats: !state.showStats };
    case "reset":
      return {
        ...state,
        pose: { yaw: 0, pitch: 0, lateralX: 0, lateralY: 0, dolly: 0 },
        threshold: 0,
      };
  }
}
