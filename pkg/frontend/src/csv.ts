import * as fs from 'fs';

export interface CsvTable {
  header: string[];
  rows: string[][];
}

export class CsvError extends Error {}

/** Parse a simple comma-separated file with a header row.
 *
 * The harness emits plain unquoted CSV, so no quoting rules apply; a
 * row with the wrong number of fields is treated as corruption.
 */
export function parseCsv(path: string): CsvTable {
  const text = fs.readFileSync(path, 'utf-8');
  const lines = text.split('\n').filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new CsvError(`${path}: empty file`);
  }
  const header = lines[0].split(',').map((h) => h.trim());
  const rows: string[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(',').map((p) => p.trim());
    if (parts.length !== header.length) {
      throw new CsvError(
        `${path}:${i + 1}: expected ${header.length} fields, got ${parts.length}`,
      );
    }
    rows.push(parts);
  }
  return { header, rows };
}

export function column(table: CsvTable, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new CsvError(`missing column ${name} (have: ${table.header.join(', ')})`);
  }
  return table.rows.map((row) => row[idx]);
}

export function numericColumn(table: CsvTable, name: string): number[] {
  return column(table, name).map((value, i) => {
    const n = Number(value);
    if (!Number.isFinite(n)) {
      throw new CsvError(`column ${name} row ${i + 1}: ${value} is not a number`);
    }
    return n;
  });
}
