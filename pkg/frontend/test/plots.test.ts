import { existsSync, mkdtempSync, readFileSync, rmSync } from 'fs';
import { tmpdir } from 'os';
import { join } from 'path';
import { afterAll, describe, expect, it } from 'vitest';

import { column, parseCsv, readCsv, MissingColumn } from '../src/csv';
import {
  fitLogLogSlope,
  plotConvergence,
  plotTimeseries,
  renderConvergence,
  renderTimeseries,
} from '../src/plots';
import { main as cliMain } from '../src/cli';

const DATA = join(__dirname, '..', 'testdata');
const RUN = join(DATA, 'trig2d_alpha05.csv');
const RUN_BORIS = join(DATA, 'trig2d_alpha05_boris.csv');
const COMPARE = join(DATA, 'trig2d_alpha05_compare.csv');
const CONV = join(DATA, 'trig2d_convergence.csv');

const outDir = mkdtempSync(join(tmpdir(), 'magwp-plots-'));
afterAll(() => rmSync(outDir, { recursive: true, force: true }));

describe('csv', () => {
  it('parses the run CSV and finds the contract columns', () => {
    const t = readCsv(RUN);
    for (const col of ['t', 'sympl_residual', 'energy', 'S']) {
      expect(t.header).toContain(col);
    }
    expect(t.rows.length).toBe(101);
    expect(column(t, 't')[0]).toBe(0);
  });

  it('keeps full double precision through parsing', () => {
    const t = parseCsv('a,b\n0.1000000000000000055511151231257827,2\n');
    expect(t.rows[0][0]).toBe(0.1);
  });

  it('raises MissingColumn for unknown names', () => {
    const t = readCsv(RUN);
    expect(() => column(t, 'does_not_exist')).toThrow(MissingColumn);
  });
});

describe('timeseries plots', () => {
  it('renders the symplecticity residual on a log axis', () => {
    const out = join(outDir, 'sympl.svg');
    plotTimeseries({
      inputs: [{ path: RUN }],
      columns: ['sympl_residual'],
      logY: true,
      title: 'deviation from symplecticity',
      out,
    });
    const svg = readFileSync(out, 'utf8');
    expect(svg.startsWith('<svg')).toBe(true);
    expect(svg).toContain('sympl_residual');
  });

  it('compares two runs in one figure', () => {
    const out = join(outDir, 'energy_compare.svg');
    plotTimeseries({
      inputs: [
        { path: RUN, label: 'symplectic2' },
        { path: RUN_BORIS, label: 'boris' },
      ],
      columns: ['energy'],
      logY: false,
      out,
    });
    const svg = readFileSync(out, 'utf8');
    expect(svg).toContain('symplectic2: energy');
    expect(svg).toContain('boris: energy');
  });

  it('plots the joined comparison columns from compare CSVs', () => {
    const out = join(outDir, 'joined.svg');
    plotTimeseries({
      inputs: [{ path: COMPARE }],
      columns: ['a_sympl_residual', 'b_sympl_residual'],
      logY: true,
      out,
    });
    expect(existsSync(out)).toBe(true);
  });

  it('rejects an empty column selection without writing a file', () => {
    const out = join(outDir, 'nothing.svg');
    expect(() =>
      plotTimeseries({ inputs: [{ path: RUN }], columns: [], out })
    ).toThrow();
    expect(existsSync(out)).toBe(false);
  });

  it('rejects missing columns without writing a file', () => {
    const out = join(outDir, 'missing.svg');
    expect(() =>
      plotTimeseries({ inputs: [{ path: RUN }], columns: ['nope'], out })
    ).toThrow(MissingColumn);
    expect(existsSync(out)).toBe(false);
  });

  it('is idempotent: identical inputs give identical bytes', () => {
    const spec = {
      inputs: [{ path: RUN }],
      columns: ['sympl_residual', 'energy'],
      logY: true,
      out: join(outDir, 'idem.svg'),
    };
    const a = renderTimeseries(spec);
    const b = renderTimeseries(spec);
    expect(a).toBe(b);
  });

  it('does not mutate its input CSV', () => {
    const before = readFileSync(RUN, 'utf8');
    renderTimeseries({ inputs: [{ path: RUN }], columns: ['energy'], out: '' });
    expect(readFileSync(RUN, 'utf8')).toBe(before);
  });
});

describe('convergence plots', () => {
  it('renders a log-log plot with a dashed tau^2 overlay', () => {
    const out = join(outDir, 'conv.svg');
    plotConvergence({ input: CONV, slopes: [2], out });
    const svg = readFileSync(out, 'utf8');
    expect(svg.startsWith('<svg')).toBe(true);
    expect(svg).toContain('tau^2');
  });

  it('supports an order-4 overlay series', () => {
    const svg = renderConvergence({ input: CONV, slopes: [4], out: '' });
    expect(svg).toContain('tau^4');
  });

  it('omits the overlay for single-point tables', () => {
    const table = readFileSync(CONV, 'utf8').trim().split('\n');
    const single = join(outDir, 'single.csv');
    require('fs').writeFileSync(single, table[0] + '\n' + table[1] + '\n');
    const svg = renderConvergence({ input: single, slopes: [2], out: '' });
    expect(svg).not.toContain('tau^2');
  });

  it('overlay slope matches the measured energy order (2 +- 0.2)', () => {
    const t = readCsv(CONV);
    const slope = fitLogLogSlope(column(t, 'tau'), column(t, 'energy_rel_err'));
    expect(Math.abs(slope - 2)).toBeLessThanOrEqual(0.2);
  });
});

describe('cli', () => {
  it('produces both figure kinds from the fixture runs', () => {
    const f1 = join(outDir, 'cli_ts.svg');
    const f2 = join(outDir, 'cli_conv.svg');
    expect(
      cliMain([
        'timeseries',
        '--input', RUN,
        '--columns', 'sympl_residual,boris_mod_residual',
        '--logy',
        '--out', f1,
      ])
    ).toBe(0);
    expect(
      cliMain(['convergence', '--input', CONV, '--slope', '2', '--out', f2])
    ).toBe(0);
    expect(existsSync(f1)).toBe(true);
    expect(existsSync(f2)).toBe(true);
  });

  it('exits 2 on missing columns and bad usage', () => {
    expect(
      cliMain(['timeseries', '--input', RUN, '--columns', 'zzz', '--out', join(outDir, 'x.svg')])
    ).toBe(2);
    expect(cliMain(['timeseries'])).toBe(2);
    expect(cliMain(['unknown-command'])).toBe(2);
  });
});
