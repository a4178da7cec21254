/**
 * CSV schemas produced by the randstab harness, plus strict parsing.
 *
 * Trial campaigns and perturbation scatters are the two inputs the figures
 * consume; any header drift is a SchemaMismatchError, not a best-effort guess.
 */

import * as fs from "fs";
import Papa from "papaparse";

export const TRIAL_HEADER = [
  "algo", "T", "k", "sigma", "rep", "seed", "error_norm",
  "closed_loop_radius", "stabilized", "overflow", "redraws", "reason",
];

export const SCATTER_HEADER = ["perturbation_norm", "closed_loop_radius"];

export interface TrialRow {
  algo: string;
  T: number;
  k: number;
  sigma: number;
  rep: number;
  seed: string; // 64-bit; beyond Number precision and unused by figures
  error_norm: number;
  closed_loop_radius: number;
  stabilized: boolean;
  overflow: boolean;
  redraws: number;
  reason: string;
}

export interface ScatterRow {
  perturbation_norm: number;
  closed_loop_radius: number;
}

export class SchemaMismatchError extends Error {}

/** Parse the harness float format; `inf`/`-inf`/`nan` are explicit tokens. */
export function parseFloatToken(token: string): number {
  if (token === "inf") return Infinity;
  if (token === "-inf") return -Infinity;
  if (token === "nan") return NaN;
  const value = Number(token);
  if (token === "" || Number.isNaN(value)) {
    throw new SchemaMismatchError(`not a number: ${JSON.stringify(token)}`);
  }
  return value;
}

function parseBool(token: string): boolean {
  if (token === "true") return true;
  if (token === "false") return false;
  throw new SchemaMismatchError(`not a boolean: ${JSON.stringify(token)}`);
}

function readRows(path: string, expectedHeader: string[]): string[][] {
  const text = fs.readFileSync(path, "utf-8");
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaMismatchError(`CSV parse failed: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0 || rows[0].join(",") !== expectedHeader.join(",")) {
    throw new SchemaMismatchError(
      `unexpected header in ${path}: ${JSON.stringify(rows[0] ?? [])}`,
    );
  }
  return rows.slice(1);
}

export function readTrialCsv(path: string): TrialRow[] {
  return readRows(path, TRIAL_HEADER).map((f) => {
    if (f.length !== TRIAL_HEADER.length) {
      throw new SchemaMismatchError(`row has ${f.length} fields: ${f.join(",")}`);
    }
    return {
      algo: f[0],
      T: parseInt(f[1], 10),
      k: parseInt(f[2], 10),
      sigma: parseFloatToken(f[3]),
      rep: parseInt(f[4], 10),
      seed: f[5],
      error_norm: parseFloatToken(f[6]),
      closed_loop_radius: parseFloatToken(f[7]),
      stabilized: parseBool(f[8]),
      overflow: parseBool(f[9]),
      redraws: parseInt(f[10], 10),
      reason: f[11],
    };
  });
}

export function readScatterCsv(path: string): ScatterRow[] {
  return readRows(path, SCATTER_HEADER).map((f) => {
    if (f.length !== SCATTER_HEADER.length) {
      throw new SchemaMismatchError(`row has ${f.length} fields: ${f.join(",")}`);
    }
    return {
      perturbation_norm: parseFloatToken(f[0]),
      closed_loop_radius: parseFloatToken(f[1]),
    };
  });
}
