import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';

import { describe, expect, it } from 'vitest';

import { CsvError, column, numericColumn, parseCsv } from '../src/csv';

function tempFile(content: string): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'csv-'));
  const file = path.join(dir, 'data.csv');
  fs.writeFileSync(file, content);
  return file;
}

describe('parseCsv', () => {
  it('reads header and rows', () => {
    const table = parseCsv(tempFile('batch_size,count\n1,10\n2,5\n'));
    expect(table.header).toEqual(['batch_size', 'count']);
    expect(numericColumn(table, 'count')).toEqual([10, 5]);
    expect(column(table, 'batch_size')).toEqual(['1', '2']);
  });

  it('rejects ragged rows', () => {
    expect(() => parseCsv(tempFile('a,b\n1\n'))).toThrow(CsvError);
  });

  it('rejects missing columns and non-numeric cells', () => {
    const table = parseCsv(tempFile('a,b\n1,x\n'));
    expect(() => column(table, 'c')).toThrow(CsvError);
    expect(() => numericColumn(table, 'b')).toThrow(CsvError);
  });

  it('rejects empty files', () => {
    expect(() => parseCsv(tempFile(''))).toThrow(CsvError);
  });
});
