#!/usr/bin/env node
/**
 * Model-side companion CLI for the textcrop core.
 *
 * Commands write the interchange files the core consumes:
 *   dump-attention   image + question -> binary attention dump
 *   dump-words       image -> word-box JSONL
 *   dump-embeddings  response JSONL -> binary embedding set + id sidecar
 *   augment          image + crop plan -> submit (image, crop, prompt)
 */

import { parseArgs } from 'node:util';
import { readFileSync, writeFileSync } from 'node:fs';

import {
  FormatError,
  GenerationError,
  ModelLoadError,
  SpecialistUnavailable,
  TokenMapError,
  ZeroVectorError,
} from './errors.js';
import { loadRaster } from './image.js';
import { StubModel } from './stubModel.js';
import { dumpAttention } from './attentionDump.js';
import { segmentWords, writeWordBoxes } from './textSegmenter.js';
import { DEFAULT_DIM, dumpEmbeddings } from './embedder.js';
import { readCropPlan } from './cropPlan.js';
import { getTemplate, renderTemplate } from './prompts.js';
import { EchoBackend, generateAugmented } from './augment.js';

const USAGE = `usage: textcrop-adapter <command> [options]

commands:
  dump-attention  --image F --question TEXT --out F [--layers N] [--grid-h N]
                  [--grid-w N] [--patch-px N] [--orig-w N] [--orig-h N]
  dump-words      --image F --out F [--ink-threshold N]
  dump-embeddings --responses F --out F [--ids F] [--dim N]
  augment         --image F --plan F --out F
                  (--prompt TEXT | --prompt-key KEY [--var name=value ...])
                  [--cli PATH]
`;

function intOption(raw: string | undefined, fallback: number, label: string): number {
  if (raw === undefined) return fallback;
  const value = Number(raw);
  if (!Number.isInteger(value) || value < 1) {
    throw new FormatError(`${label} must be a positive integer, got ${raw}`);
  }
  return value;
}

function requireOption(value: string | undefined, label: string): string {
  if (value === undefined || value === '') {
    throw new FormatError(`missing required option ${label}`);
  }
  return value;
}

function cmdDumpAttention(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      image: { type: 'string' },
      question: { type: 'string' },
      out: { type: 'string' },
      layers: { type: 'string' },
      'grid-h': { type: 'string' },
      'grid-w': { type: 'string' },
      'patch-px': { type: 'string' },
      'orig-w': { type: 'string' },
      'orig-h': { type: 'string' },
    },
  });
  const image = loadRaster(requireOption(values.image, '--image'));
  const question = requireOption(values.question, '--question');
  const out = requireOption(values.out, '--out');
  const model = new StubModel({
    layers: intOption(values.layers, 4, '--layers'),
    gridH: intOption(values['grid-h'], 24, '--grid-h'),
    gridW: intOption(values['grid-w'], 24, '--grid-w'),
    patchPx: intOption(values['patch-px'], 28, '--patch-px'),
    origW: values['orig-w'] ? intOption(values['orig-w'], 0, '--orig-w') : image.width,
    origH: values['orig-h'] ? intOption(values['orig-h'], 0, '--orig-h') : image.height,
  });
  const dump = dumpAttention(model, image, question, out);
  process.stdout.write(
    JSON.stringify({
      out,
      layers: dump.layers,
      tokens: dump.tokens,
      grid: [dump.gridH, dump.gridW],
    }) + '\n',
  );
  return 0;
}

function cmdDumpWords(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      image: { type: 'string' },
      out: { type: 'string' },
      'ink-threshold': { type: 'string' },
    },
  });
  const image = loadRaster(requireOption(values.image, '--image'));
  const out = requireOption(values.out, '--out');
  const words = segmentWords(image, {
    inkThreshold: intOption(values['ink-threshold'], 128, '--ink-threshold'),
  });
  writeWordBoxes(out, words);
  process.stdout.write(JSON.stringify({ out, words: words.length }) + '\n');
  return 0;
}

function cmdDumpEmbeddings(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      responses: { type: 'string' },
      out: { type: 'string' },
      ids: { type: 'string' },
      dim: { type: 'string' },
    },
  });
  const responsesPath = requireOption(values.responses, '--responses');
  const out = requireOption(values.out, '--out');
  const dim = intOption(values.dim, DEFAULT_DIM, '--dim');

  const texts: string[] = [];
  const ids: string[] = [];
  const lines = readFileSync(responsesPath, 'utf8').split('\n');
  lines.forEach((line, i) => {
    if (!line.trim()) return;
    let doc: unknown;
    try {
      doc = JSON.parse(line);
    } catch (err) {
      throw new FormatError(`${responsesPath}:${i + 1}: bad JSON (${(err as Error).message})`);
    }
    const obj = doc as Record<string, unknown>;
    if (typeof obj?.id !== 'string' || typeof obj?.text !== 'string') {
      throw new FormatError(`${responsesPath}:${i + 1}: need string "id" and "text" fields`);
    }
    ids.push(obj.id);
    texts.push(obj.text);
  });
  if (texts.length === 0) {
    throw new FormatError(`${responsesPath}: no responses to embed`);
  }
  const result = dumpEmbeddings(out, texts, ids, {
    dim,
    idsPath: values.ids ?? `${out}.ids.jsonl`,
  });
  process.stdout.write(
    JSON.stringify({ out, count: result.count, dim: result.dim }) + '\n',
  );
  return 0;
}

function cmdAugment(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      image: { type: 'string' },
      plan: { type: 'string' },
      out: { type: 'string' },
      prompt: { type: 'string' },
      'prompt-key': { type: 'string' },
      var: { type: 'string', multiple: true },
      cli: { type: 'string' },
    },
  });
  const image = loadRaster(requireOption(values.image, '--image'));
  const plan = readCropPlan(requireOption(values.plan, '--plan'));
  const out = requireOption(values.out, '--out');

  let prompt: string;
  if (values.prompt !== undefined) {
    prompt = values.prompt;
  } else {
    const key = requireOption(values['prompt-key'], '--prompt or --prompt-key');
    const vars: Record<string, string> = {};
    for (const binding of values.var ?? []) {
      const eq = binding.indexOf('=');
      if (eq < 1) {
        throw new FormatError(`--var expects name=value, got ${JSON.stringify(binding)}`);
      }
      vars[binding.slice(0, eq)] = binding.slice(eq + 1);
    }
    prompt = renderTemplate(getTemplate(key, values.cli ?? 'textcrop'), vars);
  }

  const result = generateAugmented(new EchoBackend(), image, plan, prompt);
  writeFileSync(out, result.completion + '\n', 'utf8');
  const crop = result.parts[1];
  process.stdout.write(
    JSON.stringify({
      out,
      parts: result.parts.map((p) => p.kind),
      crop: crop.kind === 'image' ? [crop.image.width, crop.image.height] : null,
    }) + '\n',
  );
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    switch (command) {
      case 'dump-attention':
        return cmdDumpAttention(rest);
      case 'dump-words':
        return cmdDumpWords(rest);
      case 'dump-embeddings':
        return cmdDumpEmbeddings(rest);
      case 'augment':
        return cmdAugment(rest);
      case undefined:
      case '-h':
      case '--help':
      case 'help':
        process.stdout.write(USAGE);
        return command === undefined ? 64 : 0;
      default:
        process.stderr.write(`unknown command: ${command}\n${USAGE}`);
        return 64;
    }
  } catch (err) {
    if (
      err instanceof FormatError ||
      err instanceof ModelLoadError ||
      err instanceof TokenMapError ||
      err instanceof SpecialistUnavailable ||
      err instanceof GenerationError ||
      err instanceof ZeroVectorError
    ) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    const code = (err as NodeJS.ErrnoException)?.code;
    if (typeof code === 'string' && code.startsWith('ERR_PARSE_ARGS')) {
      process.stderr.write(`error: ${(err as Error).message}\n${USAGE}`);
      return 64;
    }
    if (typeof code === 'string' && code.startsWith('E')) {
      // filesystem errors: missing input files and the like
      process.stderr.write(`error: ${(err as Error).message}\n`);
      return 1;
    }
    throw err;
  }
}

const isDirectRun = process.argv[1]?.endsWith('cli.js') ?? false;
if (isDirectRun) {
  process.exitCode = main(process.argv.slice(2));
}
