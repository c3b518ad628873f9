export { CSV_HEADER, CsvRow, EmptySelectionError, SchemaError } from "./schema.js";
export { ChartPoint, ChartSpec, PlotOptions, buildChartSpec, parseCsv } from "./chart.js";
export { RenderOptions, renderSvg } from "./svg.js";
export { runCli } from "./cli.js";
