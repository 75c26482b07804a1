import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';

import { describe, expect, it } from 'vitest';

import { render } from '../src/figures';
import { main } from '../src/cli';

function runDir(populate = true): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'run-'));
  if (!populate) return dir;
  fs.writeFileSync(
    path.join(dir, 'metrics.json'),
    JSON.stringify({ elapsed_s: 2.0, delivered_bytes_per_node: [2e6, 4e6, 3e6] }),
  );
  for (const stage of ['send', 'receive', 'delivery']) {
    fs.writeFileSync(
      path.join(dir, `hist_${stage}.csv`),
      'batch_size,count\n1,12\n4,30\n8,9\n',
    );
  }
  fs.writeFileSync(
    path.join(dir, 'sweep.csv'),
    'param,value,throughput_bytes_per_s,writes_per_delivery,latency_p50_us,verdict\n' +
      'w,5,1000000,2.0,10.0,PASS\nw,20,2500000,1.0,8.0,PASS\nw,100,4000000,0.5,6.0,PASS\n',
  );
  return dir;
}

describe('render', () => {
  it('renders throughput, histogram and sweep figures', () => {
    const out = fs.mkdtempSync(path.join(os.tmpdir(), 'figs-'));
    const result = render(runDir(), out, ['throughput', 'histograms', 'sweep']);
    const names = result.written.map((f) => path.basename(f)).sort();
    expect(names).toEqual([
      'hist_delivery.svg',
      'hist_receive.svg',
      'hist_send.svg',
      'sweep.svg',
      'throughput.svg',
    ]);
    for (const file of result.written) {
      const svg = fs.readFileSync(file, 'utf-8');
      expect(svg.startsWith('<svg')).toBe(true);
      expect(svg).toContain('</svg>');
    }
    expect(result.skipped).toEqual([]);
  });

  it('is deterministic for identical inputs', () => {
    const dir = runDir();
    const out1 = fs.mkdtempSync(path.join(os.tmpdir(), 'figs-'));
    const out2 = fs.mkdtempSync(path.join(os.tmpdir(), 'figs-'));
    render(dir, out1, ['histograms']);
    render(dir, out2, ['histograms']);
    for (const stage of ['send', 'receive', 'delivery']) {
      const a = fs.readFileSync(path.join(out1, `hist_${stage}.svg`), 'utf-8');
      const b = fs.readFileSync(path.join(out2, `hist_${stage}.svg`), 'utf-8');
      expect(a).toBe(b);
    }
  });

  it('skips missing series with a warning instead of failing', () => {
    const out = fs.mkdtempSync(path.join(os.tmpdir(), 'figs-'));
    const result = render(runDir(false), out, ['throughput', 'histograms', 'sweep']);
    expect(result.written).toEqual([]);
    expect(result.skipped.length).toBeGreaterThan(0);
  });

  it('raises on malformed csv', () => {
    const dir = runDir();
    fs.writeFileSync(path.join(dir, 'hist_send.csv'), 'batch_size,count\n1\n');
    const out = fs.mkdtempSync(path.join(os.tmpdir(), 'figs-'));
    expect(() => render(dir, out, ['histograms'])).toThrow();
  });
});

describe('cli', () => {
  it('renders a directory and exits zero', () => {
    const out = fs.mkdtempSync(path.join(os.tmpdir(), 'figs-'));
    const code = main(['render', '--in', runDir(), '--out', out, '--figs', 'throughput,sweep']);
    expect(code).toBe(0);
    expect(fs.existsSync(path.join(out, 'throughput.svg'))).toBe(true);
    expect(fs.existsSync(path.join(out, 'sweep.svg'))).toBe(true);
  });

  it('exits zero on an empty input directory', () => {
    const out = fs.mkdtempSync(path.join(os.tmpdir(), 'figs-'));
    const code = main(['render', '--in', runDir(false), '--out', out]);
    expect(code).toBe(0);
    expect(fs.readdirSync(out)).toEqual([]);
  });

  it('rejects unknown figures', () => {
    const out = fs.mkdtempSync(path.join(os.tmpdir(), 'figs-'));
    const code = main(['render', '--in', runDir(), '--out', out, '--figs', 'pie']);
    expect(code).toBe(2);
  });
});
