/**
 * SVG line figures with optional standard-error bands, rasterized to PNG
 * when the output path asks for it.
 */

import * as fs from 'fs';
import * as path from 'path';
import { scaleLinear } from 'd3-scale';

import { Series } from './aggregate.js';
import {
  SchemaError, parseConverge, parseResults, readFileText,
} from './csv.js';
import { aggregateConverge, aggregateResults } from './aggregate.js';

export type FigureKind = 'converge' | 'power_sweep' | 'k_sweep';

export interface FigureSpec {
  kind: FigureKind;
  inputPath: string;
  outputPath: string;
  xLabel?: string;
  yLabel?: string;
  title?: string;
}

const WIDTH = 860;
const HEIGHT = 540;
const MARGIN = { top: 48, right: 28, bottom: 58, left: 72 };

const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e',
                 '#8c564b'];

const DEFAULT_LABELS: Record<FigureKind, { x: string; y: string; title: string }> = {
  converge: {
    x: 'Outer iteration',
    y: 'Sum rate (bps/Hz)',
    title: 'Convergence of the accepted objective',
  },
  power_sweep: {
    x: 'Available DT transmit power (dBm)',
    y: 'Sum rate (bps/Hz)',
    title: 'Sum rate versus DT power',
  },
  k_sweep: {
    x: 'Reflecting elements',
    y: 'Sum rate (bps/Hz)',
    title: 'Sum rate versus RIS size',
  },
};

function escapeXml(text: string): string {
  return text.replace(/[<>&'"]/g, (c) => ({
    '<': '&lt;', '>': '&gt;', '&': '&amp;', "'": '&apos;', '"': '&quot;',
  }[c] as string));
}

export function loadSeries(spec: FigureSpec): Series[] {
  const text = readFileText(spec.inputPath);
  if (spec.kind === 'converge') {
    return aggregateConverge(parseConverge(text));
  }
  return aggregateResults(parseResults(text));
}

export function buildSvg(spec: FigureSpec, series: Series[]): string {
  if (series.length === 0 || series.every((s) => s.points.length === 0)) {
    throw new SchemaError('no rows');
  }
  const labels = DEFAULT_LABELS[spec.kind];
  const xLabel = spec.xLabel ?? labels.x;
  const yLabel = spec.yLabel ?? labels.y;
  const title = spec.title ?? labels.title;

  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const lows = series.flatMap((s) =>
    s.points.map((p) => p.mean - (p.stderr ?? 0)));
  const highs = series.flatMap((s) =>
    s.points.map((p) => p.mean + (p.stderr ?? 0)));
  const x = scaleLinear()
    .domain([Math.min(...xs), Math.max(...xs)])
    .range([MARGIN.left, WIDTH - MARGIN.right])
    .nice();
  const yMin = Math.min(0, ...lows);
  const y = scaleLinear()
    .domain([yMin, Math.max(...highs)])
    .range([HEIGHT - MARGIN.bottom, MARGIN.top])
    .nice();

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
    `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
    `font-family="Helvetica, Arial, sans-serif">`);
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // grid and ticks
  for (const t of x.ticks(8)) {
    const px = x(t);
    parts.push(
      `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" ` +
      `y2="${HEIGHT - MARGIN.bottom}" stroke="#e0e0e0" stroke-width="1"/>`);
    parts.push(
      `<text x="${px}" y="${HEIGHT - MARGIN.bottom + 20}" font-size="13" ` +
      `text-anchor="middle" fill="#333">${t}</text>`);
  }
  for (const t of y.ticks(8)) {
    const py = y(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${WIDTH - MARGIN.right}" ` +
      `y2="${py}" stroke="#e0e0e0" stroke-width="1"/>`);
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${py + 4}" font-size="13" ` +
      `text-anchor="end" fill="#333">${Number(t.toFixed(6))}</text>`);
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" ` +
    `width="${WIDTH - MARGIN.left - MARGIN.right}" ` +
    `height="${HEIGHT - MARGIN.top - MARGIN.bottom}" fill="none" ` +
    `stroke="#333" stroke-width="1"/>`);

  series.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const banded = s.points.filter((p) => p.stderr !== null);
    if (banded.length > 1) {
      const upper = banded.map((p) => `${x(p.x)},${y(p.mean + (p.stderr as number))}`);
      const lower = banded
        .slice()
        .reverse()
        .map((p) => `${x(p.x)},${y(p.mean - (p.stderr as number))}`);
      parts.push(
        `<polygon points="${upper.join(' ')} ${lower.join(' ')}" ` +
        `fill="${color}" opacity="0.15"/>`);
    }
    const line = s.points.map((p) => `${x(p.x)},${y(p.mean)}`).join(' ');
    parts.push(
      `<polyline points="${line}" fill="none" stroke="${color}" ` +
      `stroke-width="2.2"/>`);
    for (const p of s.points) {
      parts.push(
        `<circle cx="${x(p.x)}" cy="${y(p.mean)}" r="3.2" fill="${color}"/>`);
    }
  });

  // legend
  series.forEach((s, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const ly = MARGIN.top + 10 + idx * 20;
    const lx = MARGIN.left + 14;
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 26}" y2="${ly}" ` +
      `stroke="${color}" stroke-width="2.2"/>`);
    parts.push(
      `<text x="${lx + 32}" y="${ly + 4}" font-size="13" fill="#111">` +
      `${escapeXml(s.label)}</text>`);
  });

  parts.push(
    `<text x="${WIDTH / 2}" y="24" font-size="16" text-anchor="middle" ` +
    `fill="#111">${escapeXml(title)}</text>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="${HEIGHT - 14}" font-size="14" ` +
    `text-anchor="middle" fill="#111">${escapeXml(xLabel)}</text>`);
  parts.push(
    `<text x="20" y="${HEIGHT / 2}" font-size="14" text-anchor="middle" ` +
    `transform="rotate(-90 20 ${HEIGHT / 2})" fill="#111">` +
    `${escapeXml(yLabel)}</text>`);
  parts.push('</svg>');
  return parts.join('\n');
}

export async function render(spec: FigureSpec): Promise<void> {
  const series = loadSeries(spec);
  const svg = buildSvg(spec, series);
  const ext = path.extname(spec.outputPath).toLowerCase();
  if (ext === '.svg') {
    fs.writeFileSync(spec.outputPath, svg, 'utf-8');
    return;
  }
  if (ext === '.png') {
    const { Resvg } = await import('@resvg/resvg-js');
    const png = new Resvg(svg, { fitTo: { mode: 'width', value: WIDTH } })
      .render()
      .asPng();
    fs.writeFileSync(spec.outputPath, png);
    return;
  }
  throw new SchemaError(`unsupported output extension ${ext || '<none>'}; ` +
                        'use .png or .svg');
}
