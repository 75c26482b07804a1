import * as fs from 'fs';
import * as path from 'path';

import { numericColumn, column, parseCsv } from './csv';
import { barChart, lineChart } from './svg';

export type FigureName = 'throughput' | 'histograms' | 'sweep';

export const ALL_FIGURES: FigureName[] = ['throughput', 'histograms', 'sweep'];

export interface RenderResult {
  written: string[];
  skipped: string[];
}

const STAGES = ['send', 'receive', 'delivery'] as const;

function write(outDir: string, name: string, svg: string, written: string[]): void {
  const target = path.join(outDir, name);
  fs.writeFileSync(target, svg);
  written.push(target);
}

function renderThroughput(inDir: string, outDir: string, result: RenderResult): void {
  const metricsPath = path.join(inDir, 'metrics.json');
  if (!fs.existsSync(metricsPath)) {
    result.skipped.push('throughput: no metrics.json');
    return;
  }
  const metrics = JSON.parse(fs.readFileSync(metricsPath, 'utf-8'));
  const perNode: number[] = metrics.delivered_bytes_per_node ?? [];
  const elapsed: number = Math.max(metrics.elapsed_s ?? 0, 1e-9);
  if (perNode.length === 0) {
    result.skipped.push('throughput: no per-node byte counts');
    return;
  }
  const bars = perNode.map((bytes, node) => ({
    label: `${node}`,
    value: bytes / elapsed / 1e6,
  }));
  write(outDir, 'throughput.svg', barChart('delivered throughput', 'node', 'MB/s', bars), result.written);
}

function renderHistograms(inDir: string, outDir: string, result: RenderResult): void {
  let any = false;
  for (const stage of STAGES) {
    const csvPath = path.join(inDir, `hist_${stage}.csv`);
    if (!fs.existsSync(csvPath)) {
      result.skipped.push(`histograms: no hist_${stage}.csv`);
      continue;
    }
    const table = parseCsv(csvPath);
    const sizes = numericColumn(table, 'batch_size');
    const counts = numericColumn(table, 'count');
    const bars = sizes.map((size, i) => ({ label: `${size}`, value: counts[i] }));
    write(
      outDir,
      `hist_${stage}.svg`,
      barChart(`${stage} batch sizes`, 'batch size', 'occurrences', bars),
      result.written,
    );
    any = true;
  }
  if (!any) {
    result.skipped.push('histograms: nothing to draw');
  }
}

function renderSweep(inDir: string, outDir: string, result: RenderResult): void {
  const csvPath = path.join(inDir, 'sweep.csv');
  if (!fs.existsSync(csvPath)) {
    result.skipped.push('sweep: no sweep.csv');
    return;
  }
  const table = parseCsv(csvPath);
  const param = column(table, 'param')[0] ?? 'value';
  const labels = column(table, 'value');
  const throughput = numericColumn(table, 'throughput_bytes_per_s');
  const points = labels.map((label, i) => ({ label, value: throughput[i] / 1e6 }));
  write(
    outDir,
    'sweep.svg',
    lineChart(`throughput vs ${param}`, param, 'MB/s', points),
    result.written,
  );
}

/** Render the requested figures from a completed run directory.
 *
 * Missing inputs are recorded in `skipped` rather than raised; malformed
 * CSV raises CsvError.
 */
export function render(inDir: string, outDir: string, figures: FigureName[]): RenderResult {
  const result: RenderResult = { written: [], skipped: [] };
  fs.mkdirSync(outDir, { recursive: true });
  for (const figure of figures) {
    if (figure === 'throughput') renderThroughput(inDir, outDir, result);
    else if (figure === 'histograms') renderHistograms(inDir, outDir, result);
    else if (figure === 'sweep') renderSweep(inDir, outDir, result);
    else throw new Error(`unknown figure ${figure}`);
  }
  return result;
}
