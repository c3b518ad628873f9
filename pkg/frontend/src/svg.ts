/**
 * SVG rendering of a chart spec: dotted data series (markers joined by a
 * line) plus the straight reference line, on log-log axes.
 */

import { ChartSpec } from "./chart.js";

export interface RenderOptions {
  width?: number;
  height?: number;
}

const MARGIN = { left: 70, right: 24, top: 36, bottom: 52 };

function fmt(x: number): string {
  return Number(x.toPrecision(6)).toString();
}

function tickLabel(v: number): string {
  if (v >= 1 || v === 0) return v.toString();
  const e = Math.round(Math.log10(v));
  return Math.abs(Math.pow(10, e) - v) / v < 1e-9 ? `1e${e}` : v.toExponential(0);
}

export function renderSvg(spec: ChartSpec, options: RenderOptions = {}): string {
  const width = options.width ?? 720;
  const height = options.height ?? 520;
  const x0 = MARGIN.left;
  const x1 = width - MARGIN.right;
  const y0 = height - MARGIN.bottom;
  const y1 = MARGIN.top;

  const [nLo, nHi] = spec.xDomain;
  // pad the y range by 5% of a decade so extreme points stay inside
  const yLo = spec.yDomain[0] / Math.pow(10, 0.05);
  const yHi = spec.yDomain[1] * Math.pow(10, 0.05);

  const sx = (n: number) =>
    x0 + ((Math.log10(n) - Math.log10(nLo)) / (Math.log10(nHi) - Math.log10(nLo))) * (x1 - x0);
  const sy = (v: number) =>
    y0 - ((Math.log10(v) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))) * (y0 - y1);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  // axes
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`,
    `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`,
  );
  for (const n of spec.xTicks) {
    const px = fmt(sx(n));
    parts.push(
      `<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="black"/>`,
      `<text x="${px}" y="${y0 + 20}" text-anchor="middle">${n}</text>`,
    );
  }
  for (const v of spec.yTicks) {
    const py = fmt(sy(v));
    parts.push(
      `<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="black"/>`,
      `<text x="${x0 - 9}" y="${py}" dy="4" text-anchor="end">${tickLabel(v)}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${height - 12}" text-anchor="middle">${spec.xLabel}</text>`,
    `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${(y0 + y1) / 2})">${spec.yLabel}</text>`,
    `<text x="${(x0 + x1) / 2}" y="20" text-anchor="middle">${spec.stat} vs n ` +
      `(reference slope ${spec.referenceSlope})</text>`,
  );

  // reference line anchored at the first data point
  const r = spec.reference;
  parts.push(
    `<line class="reference" x1="${fmt(sx(r.start.n))}" y1="${fmt(sy(r.start.value))}" ` +
      `x2="${fmt(sx(r.end.n))}" y2="${fmt(sy(r.end.value))}" stroke="#888" stroke-width="1.5"/>`,
  );

  // data series: connecting line plus dot markers
  const path = spec.points
    .map((p, i) => `${i === 0 ? "M" : "L"}${fmt(sx(p.n))} ${fmt(sy(p.value))}`)
    .join(" ");
  parts.push(`<path class="series" d="${path}" fill="none" stroke="#1a56b0" stroke-width="1.5"/>`);
  for (const p of spec.points) {
    parts.push(
      `<circle class="marker" cx="${fmt(sx(p.n))}" cy="${fmt(sy(p.value))}" r="3.5" fill="#1a56b0"/>`,
    );
  }

  parts.push("</svg>");
  return parts.join("\n");
}
