#!/usr/bin/env node
/**
 * plotviz <metrics.csv> <out.svg> --chart fit-rates|model-error [--title T]
 *
 * Reads a bench metrics CSV and writes one SVG chart. Exit codes: 0 on
 * success, 2 on usage errors, 1 on unreadable or malformed input. The input
 * file is never modified.
 */

import * as fs from 'fs';

import { ChartKind, render } from './chart';
import { CsvValidationError, parseMetricsCsv } from './csv';

const USAGE =
  'usage: plotviz <metrics.csv> <out.svg> --chart fit-rates|model-error [--title TITLE]';

interface Args {
  input: string;
  output: string;
  chart: ChartKind;
  title?: string;
}

function parseArgs(argv: string[]): Args {
  const positional: string[] = [];
  let chart: string = 'fit-rates';
  let title: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === '--chart') {
      if (i + 1 >= argv.length) throw new Error('--chart needs a value');
      chart = argv[++i];
    } else if (arg === '--title') {
      if (i + 1 >= argv.length) throw new Error('--title needs a value');
      title = argv[++i];
    } else if (arg.startsWith('--')) {
      throw new Error(`unknown option ${arg}`);
    } else {
      positional.push(arg);
    }
  }
  if (positional.length !== 2) {
    throw new Error('expected exactly two paths: input CSV and output image');
  }
  if (chart !== 'fit-rates' && chart !== 'model-error') {
    throw new Error(`unknown chart kind '${chart}'`);
  }
  return { input: positional[0], output: positional[1], chart, title };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n${USAGE}\n`);
    return 2;
  }
  let text: string;
  try {
    text = fs.readFileSync(args.input, 'utf8');
  } catch (err) {
    process.stderr.write(`error: cannot read ${args.input}: ${(err as Error).message}\n`);
    return 1;
  }
  try {
    const rows = parseMetricsCsv(text);
    const svg = render(args.chart, rows, args.title);
    fs.writeFileSync(args.output, svg);
  } catch (err) {
    if (err instanceof CsvValidationError) {
      process.stderr.write(`error: invalid metrics CSV: ${err.message}\n`);
    } else {
      process.stderr.write(`error: ${(err as Error).message}\n`);
    }
    return 1;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
