/**
 * Deterministic text embedder: hashed character trigrams, L2-normalized.
 *
 * Identical strings embed identically (cosine 1.0), so the core
 * deduplicator flags exact repeats; near-duplicate strings share most
 * trigrams and land close. No model weights involved.
 */

import { ZeroVectorError } from './errors.js';
import { writeEmbeddings } from './formats.js';

export const DEFAULT_DIM = 64;

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export function embedText(text: string, dim: number = DEFAULT_DIM): Float32Array {
  if (!Number.isInteger(dim) || dim < 1) {
    throw new RangeError(`embedding dim must be a positive integer, got ${dim}`);
  }
  const padded = `${text.toLowerCase()}`;
  const counts = new Float64Array(dim);
  let grams = 0;
  for (let i = 0; i + 3 <= padded.length; i++) {
    const gram = padded.slice(i, i + 3);
    counts[fnv1a(gram) % dim] += 1;
    grams++;
  }
  if (grams === 0) {
    throw new ZeroVectorError('text too short to embed');
  }
  let normSq = 0;
  for (let i = 0; i < dim; i++) normSq += counts[i] * counts[i];
  const norm = Math.sqrt(normSq);
  const out = new Float32Array(dim);
  for (let i = 0; i < dim; i++) out[i] = counts[i] / norm;
  return out;
}

export function embedTexts(texts: string[], dim: number = DEFAULT_DIM): Float32Array {
  const out = new Float32Array(texts.length * dim);
  texts.forEach((text, i) => {
    out.set(embedText(text, dim), i * dim);
  });
  return out;
}

export interface DumpEmbeddingsResult {
  count: number;
  dim: number;
  ids: string[];
}

/**
 * Embed responses and write them in the core embedding format, with the
 * id sidecar alongside (`<path>.ids.jsonl` unless overridden).
 */
export function dumpEmbeddings(
  path: string,
  texts: string[],
  ids?: string[],
  options: { dim?: number; idsPath?: string } = {},
): DumpEmbeddingsResult {
  const dim = options.dim ?? DEFAULT_DIM;
  const resolvedIds = ids ?? texts.map((_, i) => `resp-${i}`);
  if (resolvedIds.length !== texts.length) {
    throw new RangeError(`${resolvedIds.length} ids for ${texts.length} texts`);
  }
  const vectors = embedTexts(texts, dim);
  writeEmbeddings(
    path,
    { dim, vectors, ids: resolvedIds },
    options.idsPath ?? `${path}.ids.jsonl`,
  );
  return { count: texts.length, dim, ids: resolvedIds };
}
