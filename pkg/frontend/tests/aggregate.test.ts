import { describe, expect, it } from 'vitest';

import { aggregateConverge, aggregateResults } from '../src/aggregate.js';
import {
  CONVERGE_HEADER, RESULT_HEADER, SchemaError, parseConverge, parseResults,
} from '../src/csv.js';

function resultsCsv(rows: string[]): string {
  return [RESULT_HEADER.join(','), ...rows].join('\n') + '\n';
}

describe('csv parsing', () => {
  it('accepts the versioned results header', () => {
    const rows = parseResults(resultsCsv([
      '0,proposed,30.0,4.5,7.2,3,true,0.0',
      '1,proposed,30.0,4.7,7.1,2,true,0.0',
    ]));
    expect(rows).toHaveLength(2);
    expect(rows[0].sumRate).toBe(4.5);
    expect(rows[0].feasible).toBe(true);
  });

  it('names the offending column on header mismatch', () => {
    const bad = resultsCsv([]).replace('sum_rate', 'rate_sum');
    expect(() => parseResults(bad)).toThrowError(/rate_sum/);
  });

  it('rejects an empty-but-valid file with a no-rows diagnostic', () => {
    expect(() => parseResults(resultsCsv([]))).toThrowError(/no rows/);
  });

  it('rejects non-numeric cells with line info', () => {
    expect(() => parseResults(resultsCsv(['0,proposed,30.0,abc,7,3,true,0'])))
      .toThrowError(/line 2: sum_rate/);
  });

  it('parses convergence traces', () => {
    const text = [CONVERGE_HEADER.join(','), '0,5.0,0,1.0', '0,5.0,1,1.5'].join('\n');
    const rows = parseConverge(text);
    expect(rows[1].iteration).toBe(1);
  });
});

describe('aggregation', () => {
  it('computes exact means and standard errors per cell', () => {
    const rows = parseResults(resultsCsv([
      '0,proposed,5.0,1.0,7,3,true,0',
      '1,proposed,5.0,2.0,7,3,true,0',
      '2,proposed,5.0,4.0,7,3,true,0',
      '0,proposed,15.0,3.0,7,3,true,0',
      '0,oma,5.0,0.5,7,3,true,0',
    ]));
    const series = aggregateResults(rows);
    expect(series.map((s) => s.label)).toEqual(['oma', 'proposed']);
    const proposed = series[1];
    expect(proposed.points.map((p) => p.x)).toEqual([5.0, 15.0]);
    const p5 = proposed.points[0];
    const values = [1.0, 2.0, 4.0];
    const mean = values.reduce((a, b) => a + b) / 3;
    const sample = values.reduce((a, b) => a + (b - mean) ** 2, 0) / 2;
    expect(Math.abs(p5.mean - mean)).toBeLessThan(1e-12);
    expect(Math.abs((p5.stderr as number) - Math.sqrt(sample / 3)))
      .toBeLessThan(1e-12);
    // single-seed cell: no band
    expect(proposed.points[1].stderr).toBeNull();
  });

  it('groups convergence traces by DT power', () => {
    const text = [
      CONVERGE_HEADER.join(','),
      '0,5.0,0,1.0', '0,5.0,1,2.0', '1,5.0,0,3.0', '1,5.0,1,4.0',
      '0,15.0,0,5.0',
    ].join('\n');
    const series = aggregateConverge(parseConverge(text));
    expect(series.map((s) => s.label)).toEqual(['15 dBm', '5 dBm']);
    const five = series[1];
    expect(five.points[0].mean).toBeCloseTo(2.0, 12);
    expect(five.points[1].mean).toBeCloseTo(3.0, 12);
  });
});

describe('schema guards', () => {
  it('is a SchemaError for an empty text', () => {
    expect(() => parseResults('')).toThrowError(SchemaError);
  });
});
