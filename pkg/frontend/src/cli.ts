#!/usr/bin/env node
/**
 * render --kind scatter|error|pct --in results.csv --out fig.png
 *        [--algo sf|sp] [--sigma V] [--with-k2] [--width W] [--height H]
 *
 * Exit codes: 0 success, 1 configuration/schema error, 2 I/O error.
 */

import * as fs from "fs";
import { FigureKind, FigureSpec, renderToPng } from "./charts";
import { SchemaMismatchError } from "./schema";

class UsageError extends Error {}

const USAGE =
  "usage: render --kind scatter|error|pct --in <results.csv> --out <fig.png> " +
  "[--algo sf|sp] [--sigma V] [--with-k2] [--width W] [--height H]";

export function parseArgs(argv: string[]): FigureSpec {
  if (argv[0] !== "render") {
    throw new UsageError(USAGE);
  }
  const spec: Partial<FigureSpec> = {};
  let i = 1;
  const next = (flag: string): string => {
    if (i + 1 >= argv.length) throw new UsageError(`${flag} needs a value`);
    i += 1;
    return argv[i];
  };
  for (; i < argv.length; i += 1) {
    const arg = argv[i];
    switch (arg) {
      case "--kind": {
        const kind = next(arg);
        if (kind !== "scatter" && kind !== "error" && kind !== "pct") {
          throw new UsageError(`--kind must be scatter, error or pct, got ${kind}`);
        }
        spec.kind = kind as FigureKind;
        break;
      }
      case "--in":
        spec.input = next(arg);
        break;
      case "--out":
        spec.output = next(arg);
        break;
      case "--algo": {
        const algo = next(arg);
        if (algo !== "sf" && algo !== "sp") {
          throw new UsageError(`--algo must be sf or sp, got ${algo}`);
        }
        spec.algo = algo;
        break;
      }
      case "--sigma":
        spec.sigma = Number(next(arg));
        if (Number.isNaN(spec.sigma)) throw new UsageError("--sigma must be a number");
        break;
      case "--with-k2":
        spec.includeK2 = true;
        break;
      case "--width":
        spec.width = parseInt(next(arg), 10);
        break;
      case "--height":
        spec.height = parseInt(next(arg), 10);
        break;
      default:
        throw new UsageError(`unknown argument ${arg}\n${USAGE}`);
    }
  }
  if (!spec.kind || !spec.input || !spec.output) {
    throw new UsageError(USAGE);
  }
  return spec as FigureSpec;
}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  try {
    const png = renderToPng(spec);
    fs.writeFileSync(spec.output, png);
    console.log(`wrote ${spec.output} (${png.length} bytes)`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaMismatchError || err instanceof UsageError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    const code = (err as NodeJS.ErrnoException).code;
    if (code === "ENOENT" || code === "EACCES" || code === "EISDIR" || code === "ENOTDIR") {
      console.error(`I/O error: ${(err as Error).message}`);
      return 2;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
