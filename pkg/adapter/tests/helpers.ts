import { spawnSync } from 'node:child_process';
import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

export const CORE_CLI = process.env.TEXTCROP_CLI ?? 'textcrop';

export interface CoreResult {
  status: number;
  stdout: string;
  stderr: string;
}

/** Run the installed core CLI and capture everything. */
export function runCore(args: string[]): CoreResult {
  const res = spawnSync(CORE_CLI, args, {
    encoding: 'utf8',
    maxBuffer: 64 * 1024 * 1024,
  });
  if (res.error) {
    throw new Error(`failed to spawn ${CORE_CLI}: ${res.error.message}`);
  }
  return { status: res.status ?? -1, stdout: res.stdout, stderr: res.stderr };
}

/** Run the core CLI, require exit 0, and parse its JSON stdout. */
export function runCoreJson(args: string[]): Record<string, unknown> {
  const res = runCore(args);
  if (res.status !== 0) {
    throw new Error(
      `${CORE_CLI} ${args.join(' ')} exited ${res.status}: ${res.stderr}`,
    );
  }
  return JSON.parse(res.stdout) as Record<string, unknown>;
}

export function tempDir(prefix: string): string {
  return mkdtempSync(join(tmpdir(), `${prefix}-`));
}
