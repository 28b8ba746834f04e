/**
 * Reader for the crop-plan JSON the core planner emits.
 *
 * Only the fields the adapter acts on are modeled: the refined box in
 * original-image pixels, the output raster dims, and the enlargement
 * factor. The rest of the provenance document is carried opaquely.
 */

import { readFileSync } from 'node:fs';

import { FormatError } from './errors.js';

export interface CropPlan {
  /** [x0, y0, x1, y1] in original-image pixels. */
  refined: [number, number, number, number];
  outW: number;
  outH: number;
  enlarge: number;
  wordIndices: number[];
  rough?: [number, number, number, number];
}

function asBox(value: unknown, label: string): [number, number, number, number] {
  if (
    !Array.isArray(value) ||
    value.length !== 4 ||
    !value.every((v) => typeof v === 'number' && Number.isFinite(v))
  ) {
    throw new FormatError(`${label} must be four finite numbers`);
  }
  const [x0, y0, x1, y1] = value as number[];
  if (x1 <= x0 || y1 <= y0) {
    throw new FormatError(`${label} is empty: [${value.join(', ')}]`);
  }
  return [x0, y0, x1, y1];
}

export function parseCropPlan(text: string, label = 'crop plan'): CropPlan {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new FormatError(`${label}: not valid JSON (${(err as Error).message})`);
  }
  if (typeof doc !== 'object' || doc === null || Array.isArray(doc)) {
    throw new FormatError(`${label}: top level must be an object`);
  }
  const plan = (doc as Record<string, unknown>).plan;
  if (typeof plan !== 'object' || plan === null || Array.isArray(plan)) {
    throw new FormatError(`${label}: missing "plan" object`);
  }
  const p = plan as Record<string, unknown>;

  const refined = asBox(p.refined, `${label}: plan.refined`);
  const outW = p.out_w;
  const outH = p.out_h;
  if (
    typeof outW !== 'number' || typeof outH !== 'number' ||
    !Number.isInteger(outW) || !Number.isInteger(outH) || outW < 1 || outH < 1
  ) {
    throw new FormatError(`${label}: plan.out_w/out_h must be positive integers`);
  }
  const enlarge = p.enlarge;
  if (typeof enlarge !== 'number' || !Number.isFinite(enlarge) || enlarge <= 0) {
    throw new FormatError(`${label}: plan.enlarge must be a positive number`);
  }
  let wordIndices: number[] = [];
  if (p.word_indices !== undefined) {
    if (
      !Array.isArray(p.word_indices) ||
      !p.word_indices.every((v) => typeof v === 'number' && Number.isInteger(v) && v >= 0)
    ) {
      throw new FormatError(`${label}: plan.word_indices must be non-negative integers`);
    }
    wordIndices = p.word_indices as number[];
  }
  const out: CropPlan = { refined, outW, outH, enlarge, wordIndices };
  if (p.rough !== undefined) {
    out.rough = asBox(p.rough, `${label}: plan.rough`);
  }
  return out;
}

export function readCropPlan(path: string): CropPlan {
  return parseCropPlan(readFileSync(path, 'utf8'), path);
}
