/** Browser entry point: load a bundle, wire inputs, draw frames. */

import { checkAtlasSize, extractPlane } from "./atlas.js";
import { renderStack, stackFromAtlas, toBytes } from "./compositor.js";
import { handleInput, ViewerEvent } from "./controls.js";
import { GlRenderer } from "./gl.js";
import { BundleError, validateManifest } from "./manifest.js";
import { createState, poseCamera, ViewerState } from "./state.js";

interface LoadedBundle {
  state: ViewerState;
  planes: Uint8Array[];
  atlas: { pixels: Uint8Array; width: number };
}

async function fetchJson(url: string): Promise<unknown> {
  const res = await fetch(url);
  if (!res.ok) throw new BundleError(`fetch ${url}: ${res.status} ${res.statusText}`);
  return res.json();
}

async function fetchAtlasPixels(url: string): Promise<{ pixels: Uint8Array; width: number; height: number }> {
  const res = await fetch(url);
  if (!res.ok) throw new BundleError(`fetch ${url}: ${res.status} ${res.statusText}`);
  const bitmap = await createImageBitmap(await res.blob(), { premultiplyAlpha: "none" });
  const canvas = new OffscreenCanvas(bitmap.width, bitmap.height);
  const ctx = canvas.getContext("2d", { willReadFrequently: true })!;
  ctx.drawImage(bitmap, 0, 0);
  const data = ctx.getImageData(0, 0, bitmap.width, bitmap.height);
  return { pixels: new Uint8Array(data.data.buffer), width: bitmap.width, height: bitmap.height };
}

/** Fetch and validate a bundle; either everything loads or nothing does. */
export async function loadBundle(baseUrl: string): Promise<LoadedBundle> {
  const manifest = validateManifest(await fetchJson(`${baseUrl}/manifest.json`));
  const atlas = await fetchAtlasPixels(`${baseUrl}/${manifest.atlas.file}`);
  checkAtlasSize(manifest, atlas.width, atlas.height);
  const planes: Uint8Array[] = [];
  for (let d = 0; d < manifest.dims.depth; d++) {
    planes.push(extractPlane(manifest, atlas.pixels, atlas.width, d));
  }
  return {
    state: createState(manifest),
    planes,
    atlas: { pixels: atlas.pixels, width: atlas.width },
  };
}

function showError(message: string): void {
  const panel = document.getElementById("error-panel")!;
  panel.textContent = message;
  panel.style.display = "block";
}

function drawCpuFallback(
  canvas: HTMLCanvasElement,
  bundle: LoadedBundle,
  state: ViewerState,
): void {
  const target = poseCamera(state);
  const stack = stackFromAtlas(state.manifest, bundle.atlas.pixels, bundle.atlas.width);
  const rgb = toBytes(renderStack(stack, state.reference, target, state.threshold));
  canvas.width = target.width;
  canvas.height = target.height;
  const ctx = canvas.getContext("2d")!;
  const img = ctx.createImageData(target.width, target.height);
  for (let i = 0, j = 0; i < rgb.length; i += 3, j += 4) {
    img.data[j] = rgb[i];
    img.data[j + 1] = rgb[i + 1];
    img.data[j + 2] = rgb[i + 2];
    img.data[j + 3] = 255;
  }
  ctx.putImageData(img, 0, 0);
}

function updateStats(state: ViewerState): void {
  const el = document.getElementById("stats")!;
  if (!state.showStats) {
    el.style.display = "none";
    return;
  }
  const p = state.pose;
  el.style.display = "block";
  el.textContent = [
    `planes: ${state.manifest.dims.depth}`,
    `grid: ${state.manifest.dims.width}x${state.manifest.dims.height}`,
    `threshold: ${state.threshold.toFixed(2)}`,
    `yaw/pitch: ${p.yaw.toFixed(3)} / ${p.pitch.toFixed(3)}`,
    `lateral: ${p.lateralX.toFixed(3)}, ${p.lateralY.toFixed(3)}`,
    `dolly: ${p.dolly.toFixed(3)}`,
  ].join("\n");
}

export async function startApp(): Promise<void> {
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const slider = document.getElementById("threshold") as HTMLInputElement;
  const readout = document.getElementById("threshold-value")!;
  const params = new URLSearchParams(location.search);
  const bundleUrl = params.get("bundle") ?? "bundle";

  let bundle: LoadedBundle;
  try {
    bundle = await loadBundle(bundleUrl);
  } catch (err) {
    showError(`Failed to load bundle '${bundleUrl}': ${err instanceof Error ? err.message : err}`);
    return;
  }

  let state = bundle.state;
  let gl: GlRenderer | null = null;
  try {
    gl = new GlRenderer(canvas);
    gl.uploadPlanes(bundle.planes, state.manifest.dims.width, state.manifest.dims.height);
  } catch {
    gl = null; // CPU fallback below
  }

  let pending = false;
  const redraw = () => {
    if (pending) return;
    pending = true;
    requestAnimationFrame(() => {
      pending = false;
      if (gl) {
        gl.draw(state.manifest, state.reference, poseCamera(state), state.threshold);
      } else {
        drawCpuFallback(canvas, bundle, state);
      }
      updateStats(state);
      readout.textContent = state.threshold.toFixed(2);
    });
  };

  const apply = (event: ViewerEvent) => {
    state = handleInput(state, event);
    redraw();
  };

  let dragging = false;
  canvas.addEventListener("pointerdown", (e) => {
    dragging = true;
    canvas.setPointerCapture(e.pointerId);
  });
  canvas.addEventListener("pointerup", () => (dragging = false));
  canvas.addEventListener("pointermove", (e) => {
    if (dragging) apply({ kind: "drag", dx: e.movementX, dy: e.movementY, shift: e.shiftKey });
  });
  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    apply({ kind: "wheel", delta: e.deltaY });
  }, { passive: false });
  slider.addEventListener("input", () => apply({ kind: "threshold", value: Number(slider.value) }));
  window.addEventListener("keydown", (e) => {
    if (e.key === "s") apply({ kind: "toggle-stats" });
    if (e.key === "r") apply({ kind: "reset" });
  });
  canvas.addEventListener("webglcontextlost", (e) => {
    e.preventDefault();
    showError("GPU context lost; reload the page to continue.");
  });

  redraw();
}

if (typeof document !== "undefined" && document.getElementById("view")) {
  startApp();
}
