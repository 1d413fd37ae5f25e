export { SchemaError, Table, column, parseCsv, readTable, requireColumns } from "./csv.js";
export { FigureSpec, render, renderMqsPanel, renderSteadyCurve, renderSurface } from "./figures.js";
export { SpecError, loadSpec } from "./spec.js";
