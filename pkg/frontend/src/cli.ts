#!/usr/bin/env node
// Command line for figure regeneration.
//
//   magwp-plots timeseries --input run.csv [--input other.csv]
//       [--label a --label b] --columns sympl_residual,energy
//       [--x t] [--logy] [--title T] --out fig.svg
//
//   magwp-plots convergence --input conv.csv [--y energy_rel_err]
//       [--x tau] [--slope 2 --slope 4] [--title T] --out fig.svg
//
// Exit codes: 0 success, 2 bad usage / missing column / unreadable input.

import { MissingColumn, plotConvergence, plotTimeseries } from './plots';

interface Args {
  positional: string[];
  flags: Map<string, string[]>;
  bools: Set<string>;
}

const BOOL_FLAGS = new Set(['logy']);

function parseArgs(argv: string[]): Args {
  const positional: string[] = [];
  const flags = new Map<string, string[]>();
  const bools = new Set<string>();
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a.startsWith('--')) {
      const name = a.slice(2);
      if (BOOL_FLAGS.has(name)) {
        bools.add(name);
        continue;
      }
      const val = argv[++i];
      if (val === undefined) throw new Error(`flag --${name} needs a value`);
      if (!flags.has(name)) flags.set(name, []);
      (flags.get(name) as string[]).push(val);
    } else {
      positional.push(a);
    }
  }
  return { positional, flags, bools };
}

function one(args: Args, name: string): string | undefined {
  const vals = args.flags.get(name);
  return vals ? vals[vals.length - 1] : undefined;
}

function usage(): void {
  console.error(
    'usage: magwp-plots timeseries --input CSV [--input CSV2] [--label L]... ' +
      '--columns a,b [--x t] [--logy] [--title T] --out FIG.svg\n' +
      '       magwp-plots convergence --input CSV [--y COLUMN] [--x tau] ' +
      '[--slope NU]... [--title T] --out FIG.svg'
  );
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);
  const cmd = args.positional[0];
  try {
    if (cmd === 'timeseries') {
      const inputs = args.flags.get('input') ?? [];
      const labels = args.flags.get('label') ?? [];
      const columns = (one(args, 'columns') ?? '').split(',').filter((s) => s.length > 0);
      const out = one(args, 'out');
      if (inputs.length === 0 || columns.length === 0 || !out) {
        usage();
        return 2;
      }
      const path = plotTimeseries({
        inputs: inputs.map((p, i) => ({ path: p, label: labels[i] })),
        columns,
        xColumn: one(args, 'x'),
        logY: args.bools.has('logy'),
        title: one(args, 'title'),
        out,
      });
      console.log(`wrote ${path}`);
      return 0;
    }
    if (cmd === 'convergence') {
      const input = one(args, 'input');
      const out = one(args, 'out');
      if (!input || !out) {
        usage();
        return 2;
      }
      const path = plotConvergence({
        input,
        yColumn: one(args, 'y'),
        xColumn: one(args, 'x'),
        slopes: (args.flags.get('slope') ?? []).map(Number),
        title: one(args, 'title'),
        out,
      });
      console.log(`wrote ${path}`);
      return 0;
    }
    usage();
    return 2;
  } catch (err) {
    if (err instanceof MissingColumn) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
