/**
 * Pure construction of the log-log chart specification from CSV bytes.
 *
 * The spec object is plain JSON data: the same (csv, options) pair always
 * yields a deeply equal spec, which is what the purity tests assert.
 */

import Papa from "papaparse";

import { CsvRow, EmptySelectionError, SchemaError, parseRow, validateHeader } from "./schema.js";

export interface PlotOptions {
  /** value of the `stat` column to plot */
  stat: string;
  /** slope of the straight reference line through the first data point */
  referenceSlope: number;
}

export interface ChartPoint {
  n: number;
  value: number;
}

export interface ChartSpec {
  stat: string;
  referenceSlope: number;
  /** data series, ascending in n */
  points: ChartPoint[];
  /** straight line anchored at the first data point */
  reference: { start: ChartPoint; end: ChartPoint };
  xDomain: [number, number];
  yDomain: [number, number];
  xTicks: number[];
  yTicks: number[];
  xLabel: string;
  yLabel: string;
}

export function parseCsv(text: string): CsvRow[] {
  const result = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (result.errors.length > 0) {
    const first = result.errors[0]!;
    throw new SchemaError(`CSV parse error at row ${first.row}: ${first.message}`);
  }
  const grid = result.data;
  if (grid.length === 0) {
    throw new SchemaError("empty CSV input");
  }
  validateHeader(grid[0]!);
  return grid.slice(1).map((cells, i) => parseRow(cells, i + 2));
}

function powerOfTenTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); Math.pow(10, e) <= hi * (1 + 1e-9); e += 1) {
    ticks.push(Math.pow(10, e));
  }
  return ticks;
}

export function buildChartSpec(csvText: string, options: PlotOptions): ChartSpec {
  const rows = parseCsv(csvText);
  const usable = rows.filter(
    (row) =>
      row.stat === options.stat &&
      row.n !== null &&
      row.n > 0 &&
      row.estimate !== null &&
      row.estimate > 0,
  );
  if (usable.length < 2) {
    throw new EmptySelectionError(
      `need at least 2 positive rows with stat="${options.stat}", found ${usable.length}`,
    );
  }
  const points = usable
    .map((row) => ({ n: row.n as number, value: row.estimate as number }))
    .sort((a, b) => a.n - b.n);

  const first = points[0]!;
  const last = points[points.length - 1]!;
  const reference = {
    start: { n: first.n, value: first.value },
    end: {
      n: last.n,
      value: first.value * Math.pow(last.n / first.n, options.referenceSlope),
    },
  };

  const values = points.map((p) => p.value).concat([reference.end.value]);
  const yLo = Math.min(...values);
  const yHi = Math.max(...values);
  return {
    stat: options.stat,
    referenceSlope: options.referenceSlope,
    points,
    reference,
    xDomain: [first.n, last.n],
    yDomain: [yLo, yHi],
    xTicks: points.map((p) => p.n),
    yTicks: powerOfTenTicks(yLo, yHi),
    xLabel: "n",
    yLabel: "error",
  };
}
