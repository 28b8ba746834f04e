/**
 * Prompt templates, fetched from the core CLI so both sides render the
 * exact same text.
 *
 * `textcrop inspect prompts` prints every bundled template keyed by
 * name; we cache the table per CLI binary for the process lifetime.
 */

import { spawnSync } from 'node:child_process';

import { FormatError } from './errors.js';

const cache = new Map<string, Record<string, string>>();

export function loadTemplates(cli = 'textcrop'): Record<string, string> {
  const cached = cache.get(cli);
  if (cached) return cached;
  const res = spawnSync(cli, ['inspect', 'prompts'], {
    encoding: 'utf8',
    maxBuffer: 16 * 1024 * 1024,
  });
  if (res.error) {
    throw new FormatError(`cannot run ${cli}: ${res.error.message}`);
  }
  if (res.status !== 0) {
    throw new FormatError(
      `${cli} inspect prompts exited ${res.status}: ${res.stderr.trim()}`,
    );
  }
  let doc: unknown;
  try {
    doc = JSON.parse(res.stdout);
  } catch (err) {
    throw new FormatError(`${cli} inspect prompts: bad JSON (${(err as Error).message})`);
  }
  const obj = doc as Record<string, unknown>;
  if (obj?.kind !== 'prompts' || typeof obj.templates !== 'object' || obj.templates === null) {
    throw new FormatError(`${cli} inspect prompts: unexpected document shape`);
  }
  const templates: Record<string, string> = {};
  for (const [key, value] of Object.entries(obj.templates as Record<string, unknown>)) {
    if (typeof value !== 'string') {
      throw new FormatError(`template ${key} is not a string`);
    }
    templates[key] = value;
  }
  cache.set(cli, templates);
  return templates;
}

export function getTemplate(key: string, cli = 'textcrop'): string {
  const templates = loadTemplates(cli);
  const text = templates[key];
  if (text === undefined) {
    throw new FormatError(
      `no template named ${JSON.stringify(key)}; available: ${Object.keys(templates).sort().join(', ')}`,
    );
  }
  return text;
}

/**
 * Fill `{name}` placeholders literally. Placeholders without a binding
 * are left as-is, mirroring the core renderer.
 */
export function renderTemplate(template: string, vars: Record<string, string>): string {
  let out = template;
  for (const [name, value] of Object.entries(vars)) {
    out = out.split(`{${name}}`).join(value);
  }
  return out;
}
