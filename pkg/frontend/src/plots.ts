// SVG figure generation from magwp CSV files via server-side echarts.
//
// Time-series plots draw one line per selected column (optionally from
// several input files, distinguished by label prefixes) with an optional
// logarithmic y-axis. Convergence plots are log-log scatter/lines of an
// error column against the step size, with dashed tau^nu reference overlays
// anchored at the last (smallest-step) data point.

import * as echarts from 'echarts';
import { writeFileSync } from 'fs';
import { basename } from 'path';
import { MissingColumn, Table, column, readCsv } from './csv';

export { MissingColumn };

export interface SeriesInput {
  path: string;
  label?: string;
}

export interface TimeseriesSpec {
  inputs: SeriesInput[];
  columns: string[];
  xColumn?: string; // default "t"
  logY?: boolean;
  title?: string;
  out: string;
  width?: number;
  height?: number;
}

export interface ConvergenceSpec {
  input: string;
  yColumn?: string; // default "energy_rel_err"
  xColumn?: string; // default "tau"
  slopes?: number[]; // reference overlays tau^nu
  title?: string;
  out: string;
  width?: number;
  height?: number;
}

// zrender ids carry two process-global counters: the instance prefix
// (zr7-...) and the style class number (cls-13). Strip the prefix and remap
// the class numbers in order of first appearance so identical inputs give
// identical bytes; definitions and uses stay consistent because the same
// mapping applies to both.
function normalizeSvg(svg: string): string {
  const stripped = svg.replace(/zr\d+-/g, 'zr-');
  const seen = new Map<string, string>();
  return stripped.replace(/zr-cls-\d+/g, (m) => {
    if (!seen.has(m)) seen.set(m, `zr-cls-${seen.size}`);
    return seen.get(m) as string;
  });
}

function renderSvg(option: echarts.EChartsCoreOption, width: number, height: number): string {
  const chart = echarts.init(null, null, { renderer: 'svg', ssr: true, width, height });
  chart.setOption(option);
  const svg = chart.renderToSVGString();
  chart.dispose();
  return normalizeSvg(svg);
}

function logSafe(points: [number, number][]): [number, number][] {
  // a log axis cannot show zero or negative residuals (e.g. the exact
  // initial value); drop those points like a log-scale plot would
  return points.filter(([, y]) => Number.isFinite(y) && y > 0);
}

function finite(points: [number, number][]): [number, number][] {
  return points.filter(([x, y]) => Number.isFinite(x) && Number.isFinite(y));
}

// tick values on log axes carry float noise (9.999999e-5); label them in
// exponential notation
const LOG_AXIS_LABEL = { formatter: (v: number) => v.toExponential(0) };

export function renderTimeseries(spec: TimeseriesSpec): string {
  if (spec.columns.length === 0) throw new Error('no columns selected');
  if (spec.inputs.length === 0) throw new Error('no input files given');
  const xName = spec.xColumn ?? 't';
  const series: object[] = [];
  const names: string[] = [];
  for (const input of spec.inputs) {
    const table = readCsv(input.path);
    const xs = column(table, xName);
    for (const col of spec.columns) {
      const ys = column(table, col);
      let pts: [number, number][] = xs.map((x, i) => [x, ys[i]]);
      pts = spec.logY ? logSafe(finite(pts)) : finite(pts);
      const label = input.label ?? (spec.inputs.length > 1 ? basename(input.path) : '');
      const name = label ? `${label}: ${col}` : col;
      names.push(name);
      series.push({
        name,
        type: 'line',
        showSymbol: false,
        data: pts,
      });
    }
  }
  const option = {
    animation: false,
    backgroundColor: '#ffffff',
    title: spec.title ? { text: spec.title, left: 'center' } : undefined,
    legend: { data: names, bottom: 0 },
    grid: { left: 70, right: 25, top: spec.title ? 45 : 20, bottom: 55 },
    xAxis: { type: 'value', name: xName, nameLocation: 'middle', nameGap: 28 },
    yAxis: spec.logY ? { type: 'log', axisLabel: LOG_AXIS_LABEL } : { type: 'value' },
    series,
  };
  return renderSvg(option, spec.width ?? 760, spec.height ?? 480);
}

export function plotTimeseries(spec: TimeseriesSpec): string {
  const svg = renderTimeseries(spec); // render first: no file on error
  writeFileSync(spec.out, svg);
  return spec.out;
}

export function renderConvergence(spec: ConvergenceSpec): string {
  const table: Table = readCsv(spec.input);
  const xName = spec.xColumn ?? 'tau';
  const yName = spec.yColumn ?? 'energy_rel_err';
  const xs = column(table, xName);
  const ys = column(table, yName);
  const pts = logSafe(finite(xs.map((x, i) => [x, ys[i]] as [number, number])));
  if (pts.length === 0) throw new Error(`no positive data in column '${yName}'`);
  const series: object[] = [
    {
      name: yName,
      type: 'line',
      data: pts,
      symbolSize: 8,
      lineStyle: { width: pts.length > 1 ? 1.5 : 0 },
    },
  ];
  if (pts.length > 1) {
    // anchor each tau^nu reference line at the smallest-step data point
    const [xa, ya] = pts[pts.length - 1];
    for (const nu of spec.slopes ?? []) {
      series.push({
        name: `tau^${nu}`,
        type: 'line',
        showSymbol: false,
        lineStyle: { type: 'dashed' },
        data: pts.map(([x]) => [x, ya * Math.pow(x / xa, nu)]),
      });
    }
  }
  const option = {
    animation: false,
    backgroundColor: '#ffffff',
    title: spec.title ? { text: spec.title, left: 'center' } : undefined,
    legend: { bottom: 0 },
    grid: { left: 70, right: 25, top: spec.title ? 45 : 20, bottom: 55 },
    xAxis: { type: 'log', name: xName, nameLocation: 'middle', nameGap: 28, axisLabel: LOG_AXIS_LABEL },
    yAxis: { type: 'log', axisLabel: LOG_AXIS_LABEL },
    series,
  };
  return renderSvg(option, spec.width ?? 640, spec.height ?? 480);
}

export function plotConvergence(spec: ConvergenceSpec): string {
  const svg = renderConvergence(spec);
  writeFileSync(spec.out, svg);
  return spec.out;
}

export function fitLogLogSlope(xs: number[], ys: number[]): number {
  const pts = xs
    .map((x, i) => [x, ys[i]])
    .filter(([x, y]) => x > 0 && y > 0 && Number.isFinite(y));
  const lx = pts.map(([x]) => Math.log(x));
  const ly = pts.map(([, y]) => Math.log(y));
  const n = lx.length;
  const mx = lx.reduce((a, b) => a + b, 0) / n;
  const my = ly.reduce((a, b) => a + b, 0) / n;
  let num = 0;
  let den = 0;
  for (let i = 0; i < n; i++) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}
