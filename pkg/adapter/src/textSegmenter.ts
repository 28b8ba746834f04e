/**
 * Word-box specialist over grayscale rasters.
 *
 * Ink pixels (below the threshold) are grouped into 4-connected
 * components; each component's bounding box becomes one word record in
 * reading order. This is a deterministic stand-in for an OCR/grounding
 * model, good enough to exercise the word-box sidecar contract.
 */

import { writeFileSync } from 'node:fs';

import { SpecialistUnavailable } from './errors.js';
import { Raster } from './image.js';

export interface WordRecord {
  /** Pixel box [x0, y0, x1, y1], exclusive right/bottom edges. */
  box: [number, number, number, number];
  text: string;
  conf: number;
}

export interface SegmentOptions {
  /** Pixels strictly below this value count as ink. */
  inkThreshold?: number;
  /** Components smaller than this many pixels are noise. */
  minPixels?: number;
}

export function segmentWords(image: Raster, options: SegmentOptions = {}): WordRecord[] {
  const threshold = options.inkThreshold ?? 128;
  const minPixels = options.minPixels ?? 4;
  if (!(threshold > 0 && threshold <= 255)) {
    throw new SpecialistUnavailable(`ink threshold ${threshold} out of range (0, 255]`);
  }
  const { width, height, pixels } = image;
  const seen = new Uint8Array(width * height);
  const queue = new Int32Array(width * height);
  const words: WordRecord[] = [];

  for (let start = 0; start < pixels.length; start++) {
    if (seen[start] || pixels[start] >= threshold) continue;
    let head = 0;
    let tail = 0;
    queue[tail++] = start;
    seen[start] = 1;
    let x0 = width;
    let y0 = height;
    let x1 = -1;
    let y1 = -1;
    let count = 0;
    while (head < tail) {
      const idx = queue[head++];
      const x = idx % width;
      const y = (idx - x) / width;
      count++;
      if (x < x0) x0 = x;
      if (y < y0) y0 = y;
      if (x > x1) x1 = x;
      if (y > y1) y1 = y;
      if (x > 0 && !seen[idx - 1] && pixels[idx - 1] < threshold) {
        seen[idx - 1] = 1;
        queue[tail++] = idx - 1;
      }
      if (x + 1 < width && !seen[idx + 1] && pixels[idx + 1] < threshold) {
        seen[idx + 1] = 1;
        queue[tail++] = idx + 1;
      }
      if (y > 0 && !seen[idx - width] && pixels[idx - width] < threshold) {
        seen[idx - width] = 1;
        queue[tail++] = idx - width;
      }
      if (y + 1 < height && !seen[idx + width] && pixels[idx + width] < threshold) {
        seen[idx + width] = 1;
        queue[tail++] = idx + width;
      }
    }
    if (count < minPixels) continue;
    words.push({
      box: [x0, y0, x1 + 1, y1 + 1],
      text: `word${words.length}`,
      conf: Math.min(1, 0.5 + count / (2 * (x1 + 1 - x0) * (y1 + 1 - y0))),
    });
  }

  words.sort((a, b) => a.box[1] - b.box[1] || a.box[0] - b.box[0]);
  words.forEach((w, i) => {
    w.text = `word${i}`;
  });
  return words;
}

/** Write word records as the JSONL sidecar the core loader reads. */
export function writeWordBoxes(path: string, words: WordRecord[]): void {
  const lines = words.map((w) =>
    JSON.stringify({ box: w.box, text: w.text, conf: w.conf }),
  );
  writeFileSync(path, lines.join('\n') + (lines.length ? '\n' : ''));
}
