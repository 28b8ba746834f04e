/**
 * Crop-augmented generation.
 *
 * Given the original image and a crop plan from the core planner, render
 * the enlarged crop at the planned output size and submit the multimodal
 * request as (original image, enlarged crop, prompt) — in exactly that
 * order. The backend is pluggable; a deterministic echo backend covers
 * CI and the CLI.
 */

import { GenerationError } from './errors.js';
import { Raster, renderCrop } from './image.js';
import { CropPlan } from './cropPlan.js';

export type PromptPart =
  | { kind: 'image'; image: Raster }
  | { kind: 'text'; text: string };

export interface GenerationBackend {
  generate(parts: PromptPart[]): string;
}

/** Render the plan's refined box at the planned output dims. */
export function renderPlanCrop(image: Raster, plan: CropPlan): Raster {
  const [x0, y0, x1, y1] = plan.refined;
  const rect: [number, number, number, number] = [
    Math.max(0, Math.min(x0, image.width)),
    Math.max(0, Math.min(y0, image.height)),
    Math.max(0, Math.min(x1, image.width)),
    Math.max(0, Math.min(y1, image.height)),
  ];
  if (rect[2] <= rect[0] || rect[3] <= rect[1]) {
    throw new GenerationError(
      `crop box [${plan.refined.join(', ')}] lies outside the ${image.width}x${image.height} image`,
    );
  }
  return renderCrop(image, rect, plan.outW, plan.outH);
}

export interface AugmentedResult {
  completion: string;
  /** The parts submitted, for callers that record or audit requests. */
  parts: PromptPart[];
}

export function generateAugmented(
  backend: GenerationBackend,
  image: Raster,
  plan: CropPlan,
  prompt: string,
): AugmentedResult {
  const crop = renderPlanCrop(image, plan);
  const parts: PromptPart[] = [
    { kind: 'image', image },
    { kind: 'image', image: crop },
    { kind: 'text', text: prompt },
  ];
  let completion: string;
  try {
    completion = backend.generate(parts);
  } catch (err) {
    if (err instanceof GenerationError) throw err;
    throw new GenerationError(`backend failed: ${(err as Error).message}`);
  }
  if (typeof completion !== 'string') {
    throw new GenerationError('backend returned a non-string completion');
  }
  return { completion, parts };
}

/**
 * Deterministic backend: describes what it was sent and answers with a
 * fixed letter, so downstream extraction has something to parse.
 */
export class EchoBackend implements GenerationBackend {
  generate(parts: PromptPart[]): string {
    const images = parts.filter((p) => p.kind === 'image') as Array<{
      kind: 'image';
      image: Raster;
    }>;
    const texts = parts.filter((p) => p.kind === 'text') as Array<{
      kind: 'text';
      text: string;
    }>;
    const dims = images.map((p) => `${p.image.width}x${p.image.height}`).join(', ');
    const promptChars = texts.reduce((n, p) => n + p.text.length, 0);
    return `Looked at ${images.length} image(s) [${dims}] and ${promptChars} prompt chars.\nAnswer: A`;
  }
}
