/**
 * Binary interchange files consumed by the textcrop core.
 *
 * Attention dump ("TCAD"): magic, u16 version=1, nine u32 geometry fields
 * (layers, tokens, gridH, gridW, procW, procH, origW, origH, patchPx), a
 * u16-length UTF-8 metadata blob, then two layers x tokens float32 matrices
 * (question-conditioned, then generic-conditioned), all little-endian.
 *
 * Embedding set ("TCEM"): magic, u16 version=1, u32 count, u32 dim, then
 * count x dim float32 little-endian, with an optional JSONL id sidecar.
 *
 * Writers here are deliberately mechanical: they serialize exactly what
 * they are given so tests can also produce malformed files; semantic
 * validation happens in the dump builders and in the core.
 */

import { readFileSync, writeFileSync } from 'node:fs';

import { FormatError } from './errors.js';

const TCAD_MAGIC = 'TCAD';
const TCEM_MAGIC = 'TCEM';
const FORMAT_VERSION = 1;

export interface DumpGeometry {
  layers: number;
  tokens: number;
  gridH: number;
  gridW: number;
  procW: number;
  procH: number;
  origW: number;
  origH: number;
  patchPx: number;
}

export interface AttentionDumpFile extends DumpGeometry {
  metadata: string;
  /** layers x tokens, row-major. */
  attnQ: Float32Array;
  attnGeneric: Float32Array;
}

function checkU32(name: string, value: number): void {
  if (!Number.isInteger(value) || value < 0 || value > 0xffffffff) {
    throw new FormatError(`${name} must be a u32, got ${value}`);
  }
}

export function encodeAttentionDump(dump: AttentionDumpFile): Buffer {
  const fields: Array<[string, number]> = [
    ['layers', dump.layers],
    ['tokens', dump.tokens],
    ['gridH', dump.gridH],
    ['gridW', dump.gridW],
    ['procW', dump.procW],
    ['procH', dump.procH],
    ['origW', dump.origW],
    ['origH', dump.origH],
    ['patchPx', dump.patchPx],
  ];
  for (const [name, value] of fields) checkU32(name, value);
  const cells = dump.layers * dump.tokens;
  if (dump.attnQ.length !== cells || dump.attnGeneric.length !== cells) {
    throw new FormatError(
      `attention payload must be layers*tokens=${cells} floats per matrix, ` +
        `got ${dump.attnQ.length} and ${dump.attnGeneric.length}`,
    );
  }
  const meta = Buffer.from(dump.metadata, 'utf8');
  if (meta.length > 0xffff) {
    throw new FormatError(`metadata is ${meta.length} bytes; the format caps it at 65535`);
  }

  const buf = Buffer.alloc(4 + 2 + 9 * 4 + 2 + meta.length + 2 * cells * 4);
  let off = buf.write(TCAD_MAGIC, 0, 'ascii');
  off = buf.writeUInt16LE(FORMAT_VERSION, off);
  for (const [, value] of fields) off = buf.writeUInt32LE(value, off);
  off = buf.writeUInt16LE(meta.length, off);
  off += meta.copy(buf, off);
  for (const matrix of [dump.attnQ, dump.attnGeneric]) {
    for (let i = 0; i < cells; i++) off = buf.writeFloatLE(matrix[i], off);
  }
  return buf;
}

export function writeAttentionDump(path: string, dump: AttentionDumpFile): void {
  writeFileSync(path, encodeAttentionDump(dump));
}

export function readAttentionDump(path: string): AttentionDumpFile {
  const buf = readFileSync(path);
  if (buf.length < 4 + 2 + 9 * 4 + 2) {
    throw new FormatError(`${path}: truncated before the header ends`);
  }
  if (buf.toString('ascii', 0, 4) !== TCAD_MAGIC) {
    throw new FormatError(`${path}: bad magic`);
  }
  let off = 4;
  const version = buf.readUInt16LE(off);
  off += 2;
  if (version !== FORMAT_VERSION) {
    throw new FormatError(`${path}: unsupported version ${version}`);
  }
  const raw: number[] = [];
  for (let i = 0; i < 9; i++) {
    raw.push(buf.readUInt32LE(off));
    off += 4;
  }
  const [layers, tokens, gridH, gridW, procW, procH, origW, origH, patchPx] = raw;
  const metaLen = buf.readUInt16LE(off);
  off += 2;
  if (buf.length < off + metaLen) {
    throw new FormatError(`${path}: truncated inside metadata`);
  }
  const metadata = buf.toString('utf8', off, off + metaLen);
  off += metaLen;
  const cells = layers * tokens;
  if (buf.length !== off + 2 * cells * 4) {
    throw new FormatError(
      `${path}: payload is ${buf.length - off} bytes, expected ${2 * cells * 4}`,
    );
  }
  const readMatrix = (): Float32Array => {
    const m = new Float32Array(cells);
    for (let i = 0; i < cells; i++) {
      m[i] = buf.readFloatLE(off);
      off += 4;
    }
    return m;
  };
  const attnQ = readMatrix();
  const attnGeneric = readMatrix();
  return {
    layers, tokens, gridH, gridW, procW, procH, origW, origH, patchPx,
    metadata, attnQ, attnGeneric,
  };
}

export interface EmbeddingFile {
  dim: number;
  /** count x dim, row-major. */
  vectors: Float32Array;
  ids?: string[];
}

export function writeEmbeddings(path: string, file: EmbeddingFile, idsPath?: string): void {
  checkU32('dim', file.dim);
  if (file.dim < 1) throw new FormatError('dim must be at least 1');
  if (file.vectors.length % file.dim !== 0) {
    throw new FormatError(
      `vector payload length ${file.vectors.length} is not a multiple of dim ${file.dim}`,
    );
  }
  const count = file.vectors.length / file.dim;
  if (file.ids && file.ids.length !== count) {
    throw new FormatError(`${file.ids.length} ids for ${count} vectors`);
  }
  const buf = Buffer.alloc(4 + 2 + 4 + 4 + file.vectors.length * 4);
  let off = buf.write(TCEM_MAGIC, 0, 'ascii');
  off = buf.writeUInt16LE(FORMAT_VERSION, off);
  off = buf.writeUInt32LE(count, off);
  off = buf.writeUInt32LE(file.dim, off);
  for (let i = 0; i < file.vectors.length; i++) off = buf.writeFloatLE(file.vectors[i], off);
  writeFileSync(path, buf);
  if (idsPath && file.ids) {
    const lines = file.ids.map((id) => JSON.stringify({ id })).join('\n');
    writeFileSync(idsPath, lines + '\n', 'utf8');
  }
}

export function readEmbeddings(path: string): EmbeddingFile {
  const buf = readFileSync(path);
  if (buf.length < 14) throw new FormatError(`${path}: truncated header`);
  if (buf.toString('ascii', 0, 4) !== TCEM_MAGIC) {
    throw new FormatError(`${path}: bad magic`);
  }
  const version = buf.readUInt16LE(4);
  if (version !== FORMAT_VERSION) {
    throw new FormatError(`${path}: unsupported version ${version}`);
  }
  const count = buf.readUInt32LE(6);
  const dim = buf.readUInt32LE(10);
  if (buf.length !== 14 + count * dim * 4) {
    throw new FormatError(`${path}: payload does not match ${count}x${dim} float32`);
  }
  const vectors = new Float32Array(count * dim);
  let off = 14;
  for (let i = 0; i < vectors.length; i++) {
    vectors[i] = buf.readFloatLE(off);
    off += 4;
  }
  return { dim, vectors };
}
