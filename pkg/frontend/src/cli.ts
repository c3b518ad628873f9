#!/usr/bin/env node
/**
 * Chart renderer for experiment CSV files.
 *
 *   plot --in results.csv --stat four_point --slope -1.5 --out fig1.svg
 *
 * Exit codes: 0 written, 1 I/O or argument error, 2 schema error,
 * 3 empty selection.  Output is SVG regardless of the --out extension.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { buildChartSpec } from "./chart.js";
import { EmptySelectionError, SchemaError } from "./schema.js";
import { renderSvg } from "./svg.js";

export interface CliArgs {
  input: string;
  stat: string;
  slope: number;
  out: string;
}

export function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = { input: "", stat: "four_point", slope: -1.5, out: "fig1.svg" };
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) throw new Error(`missing value for ${flag}`);
    switch (flag) {
      case "--in":
        args.input = value;
        break;
      case "--stat":
        args.stat = value;
        break;
      case "--slope": {
        const slope = Number(value);
        if (!Number.isFinite(slope)) throw new Error(`bad slope: ${value}`);
        args.slope = slope;
        break;
      }
      case "--out":
        args.out = value;
        break;
      default:
        throw new Error(`unknown flag: ${flag}`);
    }
  }
  if (!args.input) throw new Error("--in is required");
  return args;
}

export function runCli(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`argument error: ${(err as Error).message}`);
    return 1;
  }

  let csvText: string;
  try {
    csvText = readFileSync(args.input, "utf8");
  } catch (err) {
    console.error(`cannot read ${args.input}: ${(err as Error).message}`);
    return 1;
  }

  try {
    const spec = buildChartSpec(csvText, { stat: args.stat, referenceSlope: args.slope });
    writeFileSync(args.out, renderSvg(spec), "utf8");
    console.log(`wrote ${args.out} (${spec.points.length} points, stat=${spec.stat})`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    if (err instanceof EmptySelectionError) {
      console.error(`empty selection: ${err.message}`);
      return 3;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(runCli(process.argv.slice(2)));
}
