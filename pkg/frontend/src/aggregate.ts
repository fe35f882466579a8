/**
 * Mean and standard error per (series, x) cell.
 *
 * Seeds are the replication unit: the mean over seeds is the plotted
 * value, the band is plus/minus one standard error (absent for a single
 * seed).
 */

import { ConvergeRow, ResultRow } from './csv.js';

export interface AggregatePoint {
  x: number;
  mean: number;
  stderr: number | null;
  n: number;
}

export interface Series {
  label: string;
  points: AggregatePoint[];
}

function summarize(values: number[]): { mean: number; stderr: number | null } {
  const n = values.length;
  const mean = values.reduce((a, b) => a + b, 0) / n;
  if (n < 2) {
    return { mean, stderr: null };
  }
  const ss = values.reduce((a, b) => a + (b - mean) * (b - mean), 0);
  return { mean, stderr: Math.sqrt(ss / (n - 1)) / Math.sqrt(n) };
}

function groupBy<T>(rows: T[], key: (row: T) => string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const row of rows) {
    const k = key(row);
    const bucket = out.get(k);
    if (bucket) {
      bucket.push(row);
    } else {
      out.set(k, [row]);
    }
  }
  return out;
}

function toSeries<T>(rows: T[], seriesOf: (r: T) => string, xOf: (r: T) => number,
                     yOf: (r: T) => number): Series[] {
  const series: Series[] = [];
  const bySeries = groupBy(rows, seriesOf);
  for (const label of [...bySeries.keys()].sort()) {
    const byX = groupBy(bySeries.get(label)!, (r) => String(xOf(r)));
    const points: AggregatePoint[] = [];
    for (const rowsAtX of byX.values()) {
      const { mean, stderr } = summarize(rowsAtX.map(yOf));
      points.push({ x: xOf(rowsAtX[0]), mean, stderr, n: rowsAtX.length });
    }
    points.sort((a, b) => a.x - b.x);
    series.push({ label, points });
  }
  return series;
}

/** One line per scheme against the swept value (DT power or element count). */
export function aggregateResults(rows: ResultRow[]): Series[] {
  return toSeries(rows, (r) => r.scheme, (r) => r.sweepValue, (r) => r.sumRate);
}

/** One line per DT power against the outer iteration index. */
export function aggregateConverge(rows: ConvergeRow[]): Series[] {
  return toSeries(rows, (r) => `${r.dtPowerDbm} dBm`, (r) => r.iteration,
                  (r) => r.sumRate);
}
