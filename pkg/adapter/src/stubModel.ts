/**
 * Deterministic stand-in for a vision-language model.
 *
 * It reproduces the only behavior the pipeline needs from a real model:
 * given an image and a prompt, return the first-generated-token attention
 * row (head-mean) over the image-token grid, one row per layer. Outputs
 * are pure functions of (image bytes, prompt text, geometry), so CI runs
 * bit-identically everywhere with no weights or accelerators.
 *
 * Tests can also plant exact per-prompt attention matrices to get known
 * values end to end.
 */

import { ModelLoadError } from './errors.js';
import { Raster, renderCrop } from './image.js';

export const GENERIC_INSTRUCTION = 'Write a general description of the image.';

export interface PlantedAttention {
  prompt: string;
  /** layers x tokens values for attentionRows(image, prompt). */
  rows: number[][];
}

export interface StubModelOptions {
  layers: number;
  gridH: number;
  gridW: number;
  patchPx: number;
  /** Original-image dims recorded in dumps; default: the processed dims. */
  origW?: number;
  origH?: number;
  /** Exact matrices returned for specific prompts (CI oracles). */
  planted?: PlantedAttention[];
}

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export class StubModel {
  readonly layers: number;
  readonly gridH: number;
  readonly gridW: number;
  readonly patchPx: number;
  readonly procW: number;
  readonly procH: number;
  readonly origW: number;
  readonly origH: number;
  readonly name = 'stub-vlm-v1';
  private readonly planted: Map<string, Float32Array>;

  constructor(opts: StubModelOptions) {
    const { layers, gridH, gridW, patchPx } = opts;
    for (const [label, value] of [
      ['layers', layers], ['gridH', gridH], ['gridW', gridW], ['patchPx', patchPx],
    ] as const) {
      if (!Number.isInteger(value) || value < 1) {
        throw new ModelLoadError(`${label} must be a positive integer, got ${value}`);
      }
    }
    this.layers = layers;
    this.gridH = gridH;
    this.gridW = gridW;
    this.patchPx = patchPx;
    this.procW = gridW * patchPx;
    this.procH = gridH * patchPx;
    this.origW = opts.origW ?? this.procW;
    this.origH = opts.origH ?? this.procH;
    if (!Number.isInteger(this.origW) || !Number.isInteger(this.origH) ||
        this.origW < 1 || this.origH < 1) {
      throw new ModelLoadError('original dimensions must be positive integers');
    }
    this.planted = new Map();
    for (const entry of opts.planted ?? []) {
      const flat = new Float32Array(layers * this.tokens);
      if (entry.rows.length !== layers) {
        throw new ModelLoadError(
          `planted attention for ${JSON.stringify(entry.prompt)} has ` +
            `${entry.rows.length} layers, model has ${layers}`,
        );
      }
      entry.rows.forEach((row, l) => {
        if (row.length !== this.tokens) {
          throw new ModelLoadError(
            `planted layer ${l} has ${row.length} tokens, grid needs ${this.tokens}`,
          );
        }
        flat.set(row, l * this.tokens);
      });
      this.planted.set(entry.prompt, flat);
    }
  }

  get tokens(): number {
    return this.gridH * this.gridW;
  }

  /** Mean pixel value of each grid cell after resizing to processed dims. */
  private cellMeans(image: Raster): Float64Array {
    const proc =
      image.width === this.procW && image.height === this.procH
        ? image
        : renderCrop(image, [0, 0, image.width, image.height], this.procW, this.procH);
    const means = new Float64Array(this.tokens);
    for (let gy = 0; gy < this.gridH; gy++) {
      for (let gx = 0; gx < this.gridW; gx++) {
        let total = 0;
        for (let y = gy * this.patchPx; y < (gy + 1) * this.patchPx; y++) {
          const base = y * this.procW + gx * this.patchPx;
          for (let x = 0; x < this.patchPx; x++) total += proc.pixels[base + x];
        }
        means[gy * this.gridW + gx] = total / (this.patchPx * this.patchPx * 255);
      }
    }
    return means;
  }

  /**
   * First-generated-token attention over image tokens, head-mean, one row
   * per layer (layers x tokens, row-major).
   */
  attentionRows(image: Raster, prompt: string): Float32Array {
    const plantedRows = this.planted.get(prompt);
    if (plantedRows) return Float32Array.from(plantedRows);

    const means = this.cellMeans(image);
    const hash = fnv1a(prompt);
    const peak = hash % this.tokens;
    const peakY = Math.floor(peak / this.gridW);
    const peakX = peak % this.gridW;
    const span = Math.max(this.gridH, this.gridW);
    const rows = new Float32Array(this.layers * this.tokens);
    for (let l = 0; l < this.layers; l++) {
      const sharp = 0.5 + l;
      for (let t = 0; t < this.tokens; t++) {
        const dy = Math.floor(t / this.gridW) - peakY;
        const dx = (t % this.gridW) - peakX;
        const dist = Math.sqrt(dx * dx + dy * dy) / span;
        // darker cells (ink) pull attention; the prompt decides the focus peak
        rows[l * this.tokens + t] =
          0.05 + 0.25 * (1 - means[t]) + Math.exp(-sharp * dist * 4);
      }
    }
    return rows;
  }
}
