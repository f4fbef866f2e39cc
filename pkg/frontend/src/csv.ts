// CSV reading for the fixed magwp output contract: a header line followed by
// rows of full-precision floats ("nan" marks undefined diagnostics).

import { readFileSync } from 'fs';

export interface Table {
  header: string[];
  rows: number[][];
}

export function parseCsv(text: string): Table {
  const lines = text.trim().split(/\r?\n/);
  if (lines.length === 0) throw new Error('empty CSV');
  const header = lines[0].split(',').map((s) => s.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    if (!lines[i]) continue;
    const parts = lines[i].split(',');
    if (parts.length !== header.length) {
      throw new Error(`row ${i} has ${parts.length} fields, header has ${header.length}`);
    }
    rows.push(parts.map(Number));
  }
  return { header, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, 'utf8'));
}

export function column(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) throw new MissingColumn(name, table.header);
  return table.rows.map((r) => r[idx]);
}

export class MissingColumn extends Error {
  constructor(name: string, header: string[]) {
    super(`column '${name}' not found; available: ${header.join(', ')}`);
    this.name = 'MissingColumn';
  }
}
