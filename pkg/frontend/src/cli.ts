#!/usr/bin/env node
/**
 * risnoma-plots render --kind <converge|power_sweep|k_sweep>
 *                      --in <csv> --out <png|svg>
 *                      [--x-label L] [--y-label L] [--title T]
 *
 * Exit codes: 0 success, 1 usage/schema error, 2 I/O failure.
 */

import { FigureKind, FigureSpec, render } from './figure.js';
import { SchemaError } from './csv.js';

const KINDS: FigureKind[] = ['converge', 'power_sweep', 'k_sweep'];

function parseArgs(argv: string[]): FigureSpec {
  if (argv[0] !== 'render') {
    throw new SchemaError("expected the 'render' subcommand");
  }
  const opts = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith('--') || value === undefined) {
      throw new SchemaError(`malformed option near ${JSON.stringify(key)}`);
    }
    opts.set(key.slice(2), value);
  }
  const kind = opts.get('kind');
  const input = opts.get('in');
  const output = opts.get('out');
  if (!kind || !KINDS.includes(kind as FigureKind)) {
    throw new SchemaError(`--kind must be one of ${KINDS.join(', ')}`);
  }
  if (!input || !output) {
    throw new SchemaError('--in and --out are required');
  }
  return {
    kind: kind as FigureKind,
    inputPath: input,
    outputPath: output,
    xLabel: opts.get('x-label'),
    yLabel: opts.get('y-label'),
    title: opts.get('title'),
  };
}

export async function main(argv: string[]): Promise<number> {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 1;
  }
  try {
    await render(spec);
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 1;
    }
    console.error(`render failed: ${(err as Error).message}`);
    return 2;
  }
  console.log(`wrote ${spec.outputPath}`);
  return 0;
}

const isDirectRun = process.argv[1] !== undefined
  && import.meta.url.endsWith(process.argv[1].split('/').pop() as string);
if (isDirectRun) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
