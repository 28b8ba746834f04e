/**
 * Minimal grayscale raster: the stub world's image type.
 *
 * Stored on disk as JSON {width, height, pixels} with pixels base64-encoded
 * row-major bytes, so fixtures stay diffable and runtime-free.
 */

import { readFileSync, writeFileSync } from 'node:fs';

import { FormatError } from './errors.js';

export interface Raster {
  readonly width: number;
  readonly height: number;
  /** Row-major grayscale bytes, length width*height. */
  readonly pixels: Uint8Array;
}

export function makeRaster(width: number, height: number, fill = 255): Raster {
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new FormatError(`raster dimensions must be positive integers, got ${width}x${height}`);
  }
  return { width, height, pixels: new Uint8Array(width * height).fill(fill) };
}

/** Paint a filled rectangle; coordinates are clipped to the raster. */
export function drawRect(
  raster: Raster,
  x0: number,
  y0: number,
  x1: number,
  y1: number,
  value = 0,
): void {
  const left = Math.max(0, Math.floor(x0));
  const top = Math.max(0, Math.floor(y0));
  const right = Math.min(raster.width, Math.ceil(x1));
  const bottom = Math.min(raster.height, Math.ceil(y1));
  for (let y = top; y < bottom; y++) {
    raster.pixels.fill(value, y * raster.width + left, y * raster.width + right);
  }
}

export function saveRaster(path: string, raster: Raster): void {
  const body = {
    width: raster.width,
    height: raster.height,
    pixels: Buffer.from(raster.pixels).toString('base64'),
  };
  writeFileSync(path, JSON.stringify(body) + '\n', 'utf8');
}

export function loadRaster(path: string): Raster {
  let parsed: unknown;
  try {
    parsed = JSON.parse(readFileSync(path, 'utf8'));
  } catch (err) {
    throw new FormatError(`${path}: not a raster JSON file (${String(err)})`);
  }
  const obj = parsed as { width?: unknown; height?: unknown; pixels?: unknown };
  if (
    typeof obj.width !== 'number' ||
    typeof obj.height !== 'number' ||
    typeof obj.pixels !== 'string'
  ) {
    throw new FormatError(`${path}: raster JSON needs width, height and base64 pixels`);
  }
  const pixels = Uint8Array.from(Buffer.from(obj.pixels, 'base64'));
  if (pixels.length !== obj.width * obj.height) {
    throw new FormatError(
      `${path}: pixel payload ${pixels.length} does not cover ${obj.width}x${obj.height}`,
    );
  }
  return { width: obj.width, height: obj.height, pixels };
}

function sampleBilinear(raster: Raster, x: number, y: number): number {
  const cx = Math.min(Math.max(x, 0), raster.width - 1);
  const cy = Math.min(Math.max(y, 0), raster.height - 1);
  const x0 = Math.floor(cx);
  const y0 = Math.floor(cy);
  const x1 = Math.min(x0 + 1, raster.width - 1);
  const y1 = Math.min(y0 + 1, raster.height - 1);
  const fx = cx - x0;
  const fy = cy - y0;
  const p00 = raster.pixels[y0 * raster.width + x0];
  const p01 = raster.pixels[y0 * raster.width + x1];
  const p10 = raster.pixels[y1 * raster.width + x0];
  const p11 = raster.pixels[y1 * raster.width + x1];
  const top = p00 + (p01 - p00) * fx;
  const bottom = p10 + (p11 - p10) * fx;
  return top + (bottom - top) * fy;
}

/**
 * Crop a sub-pixel source rectangle and render it at outW x outH in one
 * bilinear pass (pixel centers at half-integer coordinates).
 */
export function renderCrop(
  raster: Raster,
  rect: readonly [number, number, number, number],
  outW: number,
  outH: number,
): Raster {
  const [x0, y0, x1, y1] = rect;
  if (!(x1 > x0) || !(y1 > y0)) {
    throw new FormatError(`crop rectangle [${rect.join(', ')}] has no area`);
  }
  if (!Number.isInteger(outW) || !Number.isInteger(outH) || outW < 1 || outH < 1) {
    throw new FormatError(`render size must be positive integers, got ${outW}x${outH}`);
  }
  const out = makeRaster(outW, outH, 0);
  const scaleX = (x1 - x0) / outW;
  const scaleY = (y1 - y0) / outH;
  for (let j = 0; j < outH; j++) {
    const sy = y0 + (j + 0.5) * scaleY - 0.5;
    for (let i = 0; i < outW; i++) {
      const sx = x0 + (i + 0.5) * scaleX - 0.5;
      out.pixels[j * outW + i] = Math.round(sampleBilinear(raster, sx, sy));
    }
  }
  return out;
}
