/**
 * Inline SVG renderers for bench metrics tables.
 *
 * FitRates draws one stacked bar per method (correct / over / under segments;
 * rates summing to one fill the full plot height). ModelError draws the
 * model-error curve across the table's rows, which is how a lambda or pi grid
 * reads left to right. Output is a deterministic SVG string: the same rows
 * always produce the same bytes.
 */

import { MethodRow } from './csv';

export type ChartKind = 'fit-rates' | 'model-error';

const WIDTH = 900;
const HEIGHT = 480;
const MARGIN = { top: 48, right: 160, bottom: 110, left: 64 };
const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

const SEGMENTS: Array<{ key: 'correct' | 'over' | 'under'; color: string; label: string }> = [
  { key: 'correct', color: '#2563eb', label: 'correct fit' },
  { key: 'over', color: '#d97706', label: 'over fit' },
  { key: 'under', color: '#dc2626', label: 'under fit' },
];

function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function fmt(x: number): string {
  const rounded = Number(x.toPrecision(6));
  return String(rounded);
}

function svgOpen(title: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
    `<text x="${WIDTH / 2}" y="28" text-anchor="middle" font-family="sans-serif" font-size="18">${esc(title)}</text>`,
  ].join('\n');
}

function xLabel(x: number, label: string): string {
  const y = MARGIN.top + PLOT_H + 14;
  return `<text x="${fmt(x)}" y="${y}" text-anchor="end" font-family="monospace" font-size="10" transform="rotate(-35 ${fmt(x)} ${y})">${esc(label)}</text>`;
}

function yAxis(maxValue: number, ticks: number): string[] {
  const parts: string[] = [];
  for (let i = 0; i <= ticks; i++) {
    const value = (maxValue * i) / ticks;
    const y = MARGIN.top + PLOT_H - (PLOT_H * i) / ticks;
    parts.push(
      `<line x1="${MARGIN.left - 4}" y1="${fmt(y)}" x2="${MARGIN.left + PLOT_W}" y2="${fmt(y)}" stroke="#e5e7eb" stroke-width="1"/>`,
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">${fmt(value)}</text>`,
    );
  }
  return parts;
}

function frame(): string {
  return `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${PLOT_W}" height="${PLOT_H}" fill="none" stroke="#9ca3af" stroke-width="1"/>`;
}

function legend(entries: Array<{ color: string; label: string }>): string[] {
  const x = MARGIN.left + PLOT_W + 16;
  return entries.map((entry, i) => {
    const y = MARGIN.top + 12 + i * 22;
    return (
      `<rect x="${x}" y="${y - 10}" width="12" height="12" fill="${entry.color}"/>` +
      `<text x="${x + 18}" y="${y}" font-family="sans-serif" font-size="12">${esc(entry.label)}</text>`
    );
  });
}

export function renderFitRates(rows: MethodRow[], title = 'Fit classification by method'): string {
  const parts = [svgOpen(title)];
  parts.push(...yAxis(1.0, 4));
  const slot = PLOT_W / rows.length;
  const barWidth = Math.min(56, slot * 0.6);
  rows.forEach((row, i) => {
    const xCenter = MARGIN.left + slot * (i + 0.5);
    const x = xCenter - barWidth / 2;
    let yCursor = MARGIN.top + PLOT_H;
    for (const segment of SEGMENTS) {
      const h = PLOT_H * row[segment.key];
      yCursor -= h;
      parts.push(
        `<rect x="${fmt(x)}" y="${fmt(yCursor)}" width="${fmt(barWidth)}" height="${fmt(h)}" fill="${segment.color}"><title>${esc(row.method)} ${segment.label}: ${fmt(row[segment.key])}</title></rect>`,
      );
    }
    parts.push(xLabel(xCenter, row.method));
  });
  parts.push(...legend(SEGMENTS.map(({ color, label }) => ({ color, label }))));
  parts.push(frame());
  parts.push('</svg>');
  return parts.join('\n') + '\n';
}

export function renderModelError(rows: MethodRow[], title = 'Model error by method'): string {
  const parts = [svgOpen(title)];
  const maxError = Math.max(...rows.map((r) => r.modelError), 0);
  const top = maxError > 0 ? maxError * 1.1 : 1.0;
  parts.push(...yAxis(top, 4));
  const slot = PLOT_W / rows.length;
  const points: string[] = [];
  rows.forEach((row, i) => {
    const x = MARGIN.left + slot * (i + 0.5);
    const y = MARGIN.top + PLOT_H - (PLOT_H * row.modelError) / top;
    points.push(`${fmt(x)},${fmt(y)}`);
    parts.push(
      `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="4" fill="#2563eb"><title>${esc(row.method)}: ${fmt(row.modelError)}</title></circle>`,
    );
    parts.push(xLabel(x, row.method));
  });
  parts.push(
    `<polyline points="${points.join(' ')}" fill="none" stroke="#2563eb" stroke-width="2"/>`,
  );
  parts.push(frame());
  parts.push('</svg>');
  return parts.join('\n') + '\n';
}

export function render(kind: ChartKind, rows: MethodRow[], title?: string): string {
  if (kind === 'fit-rates') {
    return title === undefined ? renderFitRates(rows) : renderFitRates(rows, title);
  }
  return title === undefined ? renderModelError(rows) : renderModelError(rows, title);
}
