/** Minimal deterministic SVG chart builders; no DOM, no randomness. */

const WIDTH = 560;
const HEIGHT = 360;
const MARGIN = { top: 36, right: 20, bottom: 52, left: 64 };

const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

function fmt(n: number): string {
  return Number(n.toFixed(2)).toString();
}

function open(title: string): string[] {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="15">${esc(title)}</text>`,
  ];
}

function axes(xLabel: string, yLabel: string, yMax: number): string[] {
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + PLOT_H;
  const parts = [
    `<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" stroke="black"/>`,
    `<line x1="${x0}" y1="${y0}" x2="${x0 + PLOT_W}" y2="${y0}" stroke="black"/>`,
    `<text x="${x0 + PLOT_W / 2}" y="${HEIGHT - 10}" text-anchor="middle" font-size="12">${esc(xLabel)}</text>`,
    `<text x="16" y="${MARGIN.top + PLOT_H / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 16 ${MARGIN.top + PLOT_H / 2})">${esc(yLabel)}</text>`,
  ];
  for (const frac of [0, 0.5, 1]) {
    const y = y0 - frac * PLOT_H;
    parts.push(
      `<text x="${x0 - 6}" y="${y + 4}" text-anchor="end" font-size="10">${fmt(yMax * frac)}</text>`,
    );
  }
  return parts;
}

export interface Bar {
  label: string;
  value: number;
}

export function barChart(title: string, xLabel: string, yLabel: string, bars: Bar[]): string {
  const yMax = Math.max(1e-9, ...bars.map((b) => b.value));
  const parts = open(title).concat(axes(xLabel, yLabel, yMax));
  const step = PLOT_W / Math.max(bars.length, 1);
  const barWidth = Math.max(2, Math.min(40, step * 0.8));
  const labelEvery = Math.max(1, Math.ceil(bars.length / 16));
  bars.forEach((bar, i) => {
    const h = (bar.value / yMax) * PLOT_H;
    const x = MARGIN.left + i * step + (step - barWidth) / 2;
    const y = MARGIN.top + PLOT_H - h;
    parts.push(`<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(barWidth)}" height="${fmt(h)}" fill="#4878d0"/>`);
    if (i % labelEvery === 0) {
      parts.push(
        `<text x="${fmt(x + barWidth / 2)}" y="${MARGIN.top + PLOT_H + 14}" text-anchor="middle" font-size="9">${esc(bar.label)}</text>`,
      );
    }
  });
  parts.push('</svg>');
  return parts.join('\n') + '\n';
}

export interface Point {
  label: string;
  value: number;
}

export function lineChart(title: string, xLabel: string, yLabel: string, points: Point[]): string {
  const yMax = Math.max(1e-9, ...points.map((p) => p.value));
  const parts = open(title).concat(axes(xLabel, yLabel, yMax));
  const step = points.length > 1 ? PLOT_W / (points.length - 1) : 0;
  const coords = points.map((p, i) => {
    const x = MARGIN.left + (points.length > 1 ? i * step : PLOT_W / 2);
    const y = MARGIN.top + PLOT_H - (p.value / yMax) * PLOT_H;
    return { x, y, label: p.label };
  });
  const path = coords.map((c, i) => `${i === 0 ? 'M' : 'L'}${fmt(c.x)},${fmt(c.y)}`).join(' ');
  parts.push(`<path d="${path}" fill="none" stroke="#4878d0" stroke-width="2"/>`);
  for (const c of coords) {
    parts.push(`<circle cx="${fmt(c.x)}" cy="${fmt(c.y)}" r="3.5" fill="#4878d0"/>`);
    parts.push(
      `<text x="${fmt(c.x)}" y="${MARGIN.top + PLOT_H + 14}" text-anchor="middle" font-size="10">${esc(c.label)}</text>`,
    );
  }
  parts.push('</svg>');
  return parts.join('\n') + '\n';
}
