import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { buildChartSpec } from "../src/chart.js";
import { renderSvg } from "../src/svg.js";

const FIXTURE = readFileSync(join(dirname(fileURLToPath(import.meta.url)), "fixtures", "figure1.csv"), "utf8");

describe("renderSvg", () => {
  const spec = buildChartSpec(FIXTURE, { stat: "four_point", referenceSlope: -1.5 });

  it("emits a well-formed standalone SVG", () => {
    const svg = renderSvg(spec);
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg.endsWith("</svg>")).toBe(true);
    expect(svg).toContain('xmlns="http://www.w3.org/2000/svg"');
  });

  it("draws one marker per data point and a connecting series path", () => {
    const svg = renderSvg(spec);
    expect(svg.match(/class="marker"/g)).toHaveLength(spec.points.length);
    expect(svg.match(/class="series"/g)).toHaveLength(1);
    expect(svg.match(/class="reference"/g)).toHaveLength(1);
  });

  it("labels the axes n and error", () => {
    const svg = renderSvg(spec);
    expect(svg).toContain(">n</text>");
    expect(svg).toContain(">error</text>");
  });

  it("renders deterministically", () => {
    expect(renderSvg(spec)).toBe(renderSvg(spec));
  });

  it("reference line loses height at slope -1.5 on descending data", () => {
    const svg = renderSvg(spec);
    const match = svg.match(
      /class="reference" x1="([\d.]+)" y1="([\d.]+)" x2="([\d.]+)" y2="([\d.]+)"/,
    );
    expect(match).not.toBeNull();
    const [, x1, y1, x2, y2] = match!.map(Number);
    expect(x2).toBeGreaterThan(x1);
    expect(y2).toBeGreaterThan(y1); // SVG y grows downward: smaller value -> lower
  });

  it("respects custom dimensions", () => {
    const svg = renderSvg(spec, { width: 400, height: 300 });
    expect(svg).toContain('width="400"');
    expect(svg).toContain('height="300"');
  });
});
