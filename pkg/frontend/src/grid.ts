/**
 * Raster value types exchanged with the core.
 *
 * Grids are row-major and dense: index (x, y) maps to `y * width + x`.
 * A Mask stores 0/1 per pixel; a ProbMap stores confidences in [0, 1].
 */

import { InvalidInput, ShapeMismatch } from "./errors.js";

export interface Mask {
  readonly width: number;
  readonly height: number;
  /** 0 background / 1 foreground, length width * height. */
  readonly data: Uint8Array;
}

export interface ProbMap {
  readonly width: number;
  readonly height: number;
  /** Confidence per pixel in [0, 1], length width * height. */
  readonly data: Float64Array;
}

function checkDims(width: number, height: number): void {
  if (!Number.isInteger(width) || !Number.isInteger(height) || width <= 0 || height <= 0) {
    throw new InvalidInput(`grid dimensions must be positive integers, got ${width}x${height}`);
  }
}

/** Fresh all-background mask. */
export function mask(width: number, height: number, data?: Uint8Array): Mask {
  checkDims(width, height);
  if (data === undefined) {
    data = new Uint8Array(width * height);
  } else if (data.length !== width * height) {
    throw new InvalidInput(`mask data length ${data.length} != ${width}x${height}`);
  }
  for (let i = 0; i < data.length; i++) {
    const v = data[i]!;
    if (v !== 0 && v !== 1) throw new InvalidInput(`mask values must be 0 or 1, got ${v} at ${i}`);
  }
  return { width, height, data };
}

/** Fresh all-zero probability map. */
export function probmap(width: number, height: number, data?: Float64Array): ProbMap {
  checkDims(width, height);
  if (data === undefined) {
    data = new Float64Array(width * height);
  } else if (data.length !== width * height) {
    throw new InvalidInput(`probmap data length ${data.length} != ${width}x${height}`);
  }
  for (let i = 0; i < data.length; i++) {
    const v = data[i]!;
    if (!(v >= 0 && v <= 1)) throw new InvalidInput(`probabilities must lie in [0, 1], got ${v} at ${i}`);
  }
  return { width, height, data };
}

export function sameShape(a: { width: number; height: number }, b: { width: number; height: number },
                          what: string): void {
  if (a.width !== b.width || a.height !== b.height) {
    throw new ShapeMismatch(`${what}: ${a.width}x${a.height} vs ${b.width}x${b.height}`);
  }
}

export function countForeground(m: Mask): number {
  let n = 0;
  for (let i = 0; i < m.data.length; i++) n += m.data[i]!;
  return n;
}
