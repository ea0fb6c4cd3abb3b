/** WebGL2 plane-stack renderer.
 *
 * Each plane is a textured quad at its depth in the reference frustum,
 * drawn back to front with standard over blending; fragments below the
 * alpha threshold are discarded. This is the GPU realization of exactly
 * the same mapping the CPU compositor evaluates per pixel.
 */

import { Camera, cameraCenter, matVec, transpose, Vec3 } from "./camera.js";
import type { Manifest } from "./manifest.js";

const VERTEX_SRC = `#version 300 es
layout(location = 0) in vec2 corner;   // quad corner in [0,1]^2
uniform vec3 uOrigin;                   // world position of texel (0,0)
uniform vec3 uStepX;                    // world step per texel column
uniform vec3 uStepY;                    // world step per texel row
uniform vec2 uPlaneSize;                // texels per plane (W, H)
uniform mat3 uRotation;                 // world-to-camera
uniform vec3 uTranslation;
uniform mat3 uIntrinsics;
uniform vec2 uViewport;                 // target W, H in pixels
out vec2 vUv;

void main() {
  // Quad spans pixel centers [-0.5, W-0.5] x [-0.5, H-0.5] so CLAMP_TO_EDGE
  // matches the producer's edge-clamp sampling.
  vec2 texel = corner * uPlaneSize - 0.5;
  vec3 world = uOrigin + texel.x * uStepX + texel.y * uStepY;
  vec3 cam = uRotation * world + uTranslation;
  vec3 pix = uIntrinsics * cam;
  // Map pixel coordinates to clip space; pixel centers at integers.
  vec2 ndc = vec2(
    2.0 * (pix.x / pix.z + 0.5) / uViewport.x - 1.0,
    1.0 - 2.0 * (pix.y / pix.z + 0.5) / uViewport.y
  );
  gl_Position = vec4(ndc * pix.z, 0.0, pix.z);
  vUv = corner;
}`;

const FRAGMENT_SRC = `#version 300 es
precision highp float;
uniform sampler2D uPlane;
uniform float uThreshold;
in vec2 vUv;
out vec4 color;

void main() {
  vec4 texel = texture(uPlane, vUv);
  if (texel.a < uThreshold) discard;
  color = texel;
}`;

function compile(gl: WebGL2RenderingContext, type: number, src: string): WebGLShader {
  const shader = gl.createShader(type)!;
  gl.shaderSource(shader, src);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    throw new Error(`shader compile failed: ${gl.getShaderInfoLog(shader)}`);
  }
  return shader;
}

export class GlRenderer {
  private gl: WebGL2RenderingContext;
  private program: WebGLProgram;
  private textures: WebGLTexture[] = [];
  private uniforms: Record<string, WebGLUniformLocation> = {};

  constructor(private canvas: HTMLCanvasElement) {
    const gl = canvas.getContext("webgl2", { premultipliedAlpha: false });
    if (!gl) throw new Error("WebGL2 is not available");
    this.gl = gl;
    const program = gl.createProgram()!;
    gl.attachShader(program, compile(gl, gl.VERTEX_SHADER, VERTEX_SRC));
    gl.attachShader(program, compile(gl, gl.FRAGMENT_SHADER, FRAGMENT_SRC));
    gl.linkProgram(program);
    if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
      throw new Error(`program link failed: ${gl.getProgramInfoLog(program)}`);
    }
    this.program = program;
    for (const name of [
      "uOrigin", "uStepX", "uStepY", "uPlaneSize", "uRotation",
      "uTranslation", "uIntrinsics", "uViewport", "uPlane", "uThreshold",
    ]) {
      this.uniforms[name] = gl.getUniformLocation(program, name)!;
    }

    const quad = gl.createBuffer();
    gl.bindBuffer(gl.ARRAY_BUFFER, quad);
    gl.bufferData(
      gl.ARRAY_BUFFER,
      new Float32Array([0, 0, 1, 0, 0, 1, 1, 1]),
      gl.STATIC_DRAW,
    );
    gl.enableVertexAttribArray(0);
    gl.vertexAttribPointer(0, 2, gl.FLOAT, false, 0, 0);

    gl.enable(gl.BLEND);
    gl.blendFunc(gl.SRC_ALPHA, gl.ONE_MINUS_SRC_ALPHA);
    gl.disable(gl.DEPTH_TEST);
  }

  uploadPlanes(planes: Uint8Array[], width: number, height: number): void {
    const gl = this.gl;
    this.textures.forEach((t) => gl.deleteTexture(t));
    this.textures = planes.map((pixels) => {
      const tex = gl.createTexture()!;
      gl.bindTexture(gl.TEXTURE_2D, tex);
      gl.texImage2D(gl.TEXTURE_2D, 0, gl.RGBA, width, height, 0, gl.RGBA, gl.UNSIGNED_BYTE, pixels);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MIN_FILTER, gl.LINEAR);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_MAG_FILTER, gl.LINEAR);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_S, gl.CLAMP_TO_EDGE);
      gl.texParameteri(gl.TEXTURE_2D, gl.TEXTURE_WRAP_T, gl.CLAMP_TO_EDGE);
      return tex;
    });
  }

  /** Draw the stack for a target camera; planes render back to front. */
  draw(manifest: Manifest, reference: Camera, target: Camera, threshold: number): void {
    const gl = this.gl;
    const { width: w, height: h } = manifest.dims;
    this.canvas.width = target.width;
    this.canvas.height = target.height;
    gl.viewport(0, 0, target.width, target.height);
    gl.clearColor(0, 0, 0, 1);
    gl.clear(gl.COLOR_BUFFER_BIT);
    gl.useProgram(this.program);

    const camToWorld = transpose(reference.rotation);
    const refCenter = cameraCenter(reference);
    const kInv = invIntrinsics(reference);
    const u = this.uniforms;
    gl.uniformMatrix3fv(u.uRotation, true, Float32Array.from(target.rotation));
    gl.uniform3fv(u.uTranslation, Float32Array.from(target.translation));
    gl.uniformMatrix3fv(u.uIntrinsics, true, Float32Array.from(target.intrinsics));
    gl.uniform2f(u.uViewport, target.width, target.height);
    gl.uniform2f(u.uPlaneSize, w, h);
    gl.uniform1f(u.uThreshold, threshold);
    gl.uniform1i(u.uPlane, 0);
    gl.activeTexture(gl.TEXTURE0);

    for (let d = 0; d < this.textures.length; d++) {
      const depth = manifest.depths[d];
      // Rays through pixel (x, y) hit the plane at depth * K^-1 (x, y, 1).
      const originCam: Vec3 = [depth * kInv[2], depth * kInv[5], depth];
      const stepXCam: Vec3 = [depth * kInv[0], 0, 0];
      const stepYCam: Vec3 = [depth * kInv[1], depth * kInv[4], 0];
      const origin = add(refCenter, matVec(camToWorld, originCam));
      gl.uniform3fv(u.uOrigin, Float32Array.from(origin));
      gl.uniform3fv(u.uStepX, Float32Array.from(matVec(camToWorld, stepXCam)));
      gl.uniform3fv(u.uStepY, Float32Array.from(matVec(camToWorld, stepYCam)));
      gl.bindTexture(gl.TEXTURE_2D, this.textures[d]);
      gl.drawArrays(gl.TRIANGLE_STRIP, 0, 4);
    }
  }
}

function add(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

function invIntrinsics(cam: Camera): number[] {
  const k = cam.intrinsics;
  const fx = k[0], skew = k[1], cx = k[2], fy = k[4], cy = k[5];
  // upper-triangular inverse, row-major
  return [
    1 / fx, -skew / (fx * fy), (skew * cy - cx * fy) / (fx * fy),
    0, 1 / fy, -cy / fy,
    0, 0, 1,
  ];
}
