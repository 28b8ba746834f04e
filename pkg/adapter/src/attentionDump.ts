/**
 * Build an attention dump from two model passes and write it in the
 * core tool's binary dump format.
 *
 * Pass one uses the caller's question prompt; pass two uses the fixed
 * generic instruction. Both rows come from the first generated token,
 * head-mean, over the image-token grid, which is exactly what the core
 * relevance-map stage expects to divide.
 */

import { TokenMapError } from './errors.js';
import { Raster } from './image.js';
import { AttentionDumpFile, writeAttentionDump } from './formats.js';
import { GENERIC_INSTRUCTION, StubModel } from './stubModel.js';

export interface DumpAttentionOptions {
  /** Extra key/value pairs merged into the dump metadata JSON. */
  extraMetadata?: Record<string, string>;
}

function checkRows(label: string, rows: Float32Array, expected: number): void {
  if (rows.length !== expected) {
    throw new TokenMapError(
      `${label} pass returned ${rows.length} attention values, ` +
        `image-token span needs ${expected}`,
    );
  }
  for (let i = 0; i < rows.length; i++) {
    const v = rows[i];
    if (!Number.isFinite(v) || v < 0) {
      throw new TokenMapError(`${label} pass produced invalid attention value ${v} at ${i}`);
    }
  }
}

export function dumpAttention(
  model: StubModel,
  image: Raster,
  question: string,
  outPath: string,
  options: DumpAttentionOptions = {},
): AttentionDumpFile {
  const expected = model.layers * model.tokens;
  const attnQ = model.attentionRows(image, question);
  const attnGeneric = model.attentionRows(image, GENERIC_INSTRUCTION);
  checkRows('question', attnQ, expected);
  checkRows('generic', attnGeneric, expected);

  const metadata = JSON.stringify({
    model: model.name,
    answer_token: 'first generated token, head-mean over image tokens',
    tile_grid: `${model.gridH}x${model.gridW}`,
    question,
    generic_instruction: GENERIC_INSTRUCTION,
    ...options.extraMetadata,
  });

  const dump: AttentionDumpFile = {
    layers: model.layers,
    tokens: model.tokens,
    gridH: model.gridH,
    gridW: model.gridW,
    procW: model.procW,
    procH: model.procH,
    origW: model.origW,
    origH: model.origH,
    patchPx: model.patchPx,
    metadata,
    attnQ,
    attnGeneric,
  };
  writeAttentionDump(outPath, dump);
  return dump;
}
