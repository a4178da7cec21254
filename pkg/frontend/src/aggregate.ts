/**
 * Grouping of trial rows into the per-cell aggregates the figures plot.
 *
 * The stabilized percentage is computed as (100 * count) / n in exactly the
 * arithmetic the harness's `summarize` uses, so plotted values match its CSV
 * bit for bit.
 */

import { TrialRow } from "./schema";

export interface CellAggregate {
  algo: string;
  T: number;
  k: number;
  sigma: number;
  n: number;
  medianError: number;
  stabilizedPct: number;
}

/** Median matching numpy: mean of the two middle order statistics for even n. */
export function median(values: number[]): number {
  if (values.length === 0) return NaN;
  const sorted = [...values].sort((a, b) => (a < b ? -1 : a > b ? 1 : 0));
  const mid = sorted.length >> 1;
  if (sorted.length % 2 === 1) return sorted[mid];
  return (sorted[mid - 1] + sorted[mid]) * 0.5;
}

export function aggregateCells(rows: TrialRow[]): CellAggregate[] {
  const groups = new Map<string, TrialRow[]>();
  const order: string[] = [];
  for (const row of rows) {
    const key = `${row.algo}|${row.T}|${row.k}|${row.sigma}`;
    const cell = groups.get(key);
    if (cell) {
      cell.push(row);
    } else {
      groups.set(key, [row]);
      order.push(key);
    }
  }
  return order.map((key) => {
    const cell = groups.get(key)!;
    const stabilized = cell.reduce((acc, r) => acc + (r.stabilized ? 1 : 0), 0);
    return {
      algo: cell[0].algo,
      T: cell[0].T,
      k: cell[0].k,
      sigma: cell[0].sigma,
      n: cell.length,
      medianError: median(cell.map((r) => r.error_norm)),
      stabilizedPct: (100.0 * stabilized) / cell.length,
    };
  });
}

export interface Filters {
  algo?: string;
  sigma?: number;
}

export function applyFilters(rows: TrialRow[], filters: Filters): TrialRow[] {
  let out = rows;
  if (filters.algo !== undefined) out = out.filter((r) => r.algo === filters.algo);
  if (filters.sigma !== undefined) out = out.filter((r) => r.sigma === filters.sigma);
  return out;
}

export function distinct<T>(values: T[]): T[] {
  return [...new Set(values)];
}
