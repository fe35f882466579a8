/**
 * Strict readers for the two harness CSV schemas.
 *
 * The harness versions its headers; any column mismatch is reported by
 * name so a schema drift fails loudly rather than plotting nonsense.
 */

import * as fs from 'fs';

export const RESULT_HEADER = [
  'seed', 'scheme', 'sweep_value', 'sum_rate', 'rate_cu',
  'iterations_used', 'feasible', 'wall_time_ms',
] as const;

export const CONVERGE_HEADER = [
  'seed', 'dt_power_dbm', 'iteration', 'sum_rate',
] as const;

export interface ResultRow {
  seed: number;
  scheme: string;
  sweepValue: number;
  sumRate: number;
  rateCu: number;
  iterationsUsed: number;
  feasible: boolean;
  wallTimeMs: number;
}

export interface ConvergeRow {
  seed: number;
  dtPowerDbm: number;
  iteration: number;
  sumRate: number;
}

export class SchemaError extends Error {}

function splitCsv(text: string): string[][] {
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0)
    .map((line) => line.split(','));
}

function checkHeader(actual: string[], expected: readonly string[]): void {
  for (let i = 0; i < expected.length; i += 1) {
    if (actual[i] !== expected[i]) {
      throw new SchemaError(
        `column ${i + 1} is ${JSON.stringify(actual[i] ?? '<missing>')}, ` +
        `expected ${JSON.stringify(expected[i])}`,
      );
    }
  }
  if (actual.length !== expected.length) {
    throw new SchemaError(
      `unexpected extra column ${JSON.stringify(actual[expected.length])}`,
    );
  }
}

function num(raw: string, column: string, line: number): number {
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`line ${line}: ${column} is not a number: ${raw}`);
  }
  return value;
}

export function parseResults(text: string): ResultRow[] {
  const lines = splitCsv(text);
  if (lines.length === 0) {
    throw new SchemaError('empty file: no header');
  }
  checkHeader(lines[0], RESULT_HEADER);
  const rows: ResultRow[] = [];
  for (let i = 1; i < lines.length; i += 1) {
    const f = lines[i];
    rows.push({
      seed: num(f[0], 'seed', i + 1),
      scheme: f[1],
      sweepValue: num(f[2], 'sweep_value', i + 1),
      sumRate: num(f[3], 'sum_rate', i + 1),
      rateCu: num(f[4], 'rate_cu', i + 1),
      iterationsUsed: num(f[5], 'iterations_used', i + 1),
      feasible: f[6] === 'true',
      wallTimeMs: num(f[7], 'wall_time_ms', i + 1),
    });
  }
  if (rows.length === 0) {
    throw new SchemaError('no rows');
  }
  return rows;
}

export function parseConverge(text: string): ConvergeRow[] {
  const lines = splitCsv(text);
  if (lines.length === 0) {
    throw new SchemaError('empty file: no header');
  }
  checkHeader(lines[0], CONVERGE_HEADER);
  const rows: ConvergeRow[] = [];
  for (let i = 1; i < lines.length; i += 1) {
    const f = lines[i];
    rows.push({
      seed: num(f[0], 'seed', i + 1),
      dtPowerDbm: num(f[1], 'dt_power_dbm', i + 1),
      iteration: num(f[2], 'iteration', i + 1),
      sumRate: num(f[3], 'sum_rate', i + 1),
    });
  }
  if (rows.length === 0) {
    throw new SchemaError('no rows');
  }
  return rows;
}

export function readFileText(path: string): string {
  return fs.readFileSync(path, 'utf-8');
}
