/** The three figure kinds rendered from dualbath CSV tables. */

import { basename } from "node:path";

import { SchemaError, Table, column, requireColumns } from "./csv.js";
import {
  HEIGHT, MARGIN, WIDTH, SERIES_COLORS, axes, clipped, divergingColor,
  document as svgDoc, extent, fmt, linearScale, polyline, text,
} from "./svg.js";

export interface FigureSpec {
  kind: "steady_curve" | "surface" | "mqs_panel";
  inputs: string[];
  output: string;
  xlabel?: string;
  ylabel?: string;
  title?: string;
}

const PLOT_X: [number, number] = [MARGIN.left, WIDTH - MARGIN.right];
const PLOT_Y: [number, number] = [HEIGHT - MARGIN.bottom, MARGIN.top];

/** Steady-state transfer versus the swept parameter, one series per CSV. */
export function renderSteadyCurve(tables: Table[], names: string[],
                                  spec: FigureSpec): string {
  const series = tables.map((t) => {
    requireColumns(t, ["P1_inf"]);
    const xName = t.columns[0];
    return { x: column(t, xName), y: column(t, "P1_inf"), xName };
  });
  const sx = linearScale(extent(series.flatMap((s) => s.x)), PLOT_X);
  const sy = linearScale([0, 1], PLOT_Y);
  const data: string[] = [];
  const labels: string[] = [];
  series.forEach((s, i) => {
    const color = SERIES_COLORS[i % SERIES_COLORS.length];
    data.push(polyline(s.x, s.y, sx, sy, color));
    for (let k = 0; k < s.x.length; k++) {
      data.push(`<circle cx="${fmt(sx(s.x[k]))}" cy="${fmt(sy(s.y[k]))}" r="3" fill="${color}"/>`);
    }
    labels.push(text(WIDTH - MARGIN.right - 8, MARGIN.top + 18 + 16 * i,
      names[i], "end", 12, ` fill="${color}"`));
  });
  const parts = [clipped(data.join("\n")), ...labels];
  parts.push(axes(sx, sy, spec.xlabel ?? series[0].xName,
    spec.ylabel ?? "P1_inf", spec.title ?? "steady-state transfer"));
  return svgDoc(parts.join("\n"));
}

/** Heatmap of sigma_z over (t, parameter) from a long-format table. */
export function renderSurface(table: Table, spec: FigureSpec): string {
  if (table.columns.length !== 3) {
    throw new SchemaError(
      `surface input needs exactly columns t,<parameter>,sigma_z; got ${table.columns.join(",")}`);
  }
  requireColumns(table, ["t", "sigma_z"]);
  const pName = table.columns[1];
  const t = column(table, "t");
  const p = column(table, pName);
  const z = column(table, "sigma_z");
  const tVals = [...new Set(t)].sort((a, b) => a - b);
  const pVals = [...new Set(p)].sort((a, b) => a - b);
  const sx = linearScale([tVals[0], tVals[tVals.length - 1]], PLOT_X);
  const sy = linearScale([pVals[0], pVals[pVals.length - 1]], PLOT_Y);
  const cellW = (PLOT_X[1] - PLOT_X[0]) / tVals.length;
  const cellH = (PLOT_Y[0] - PLOT_Y[1]) / pVals.length;
  const ti = new Map(tVals.map((v, i) => [v, i]));
  const pi = new Map(pVals.map((v, i) => [v, i]));
  const cellsSvg: string[] = [];
  for (let k = 0; k < z.length; k++) {
    const x = PLOT_X[0] + ti.get(t[k])! * cellW;
    const y = PLOT_Y[1] + (pVals.length - 1 - pi.get(p[k])!) * cellH;
    cellsSvg.push(`<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(cellW + 0.5)}" ` +
      `height="${fmt(cellH + 0.5)}" fill="${divergingColor(z[k])}"/>`);
  }
  const parts: string[] = [clipped(cellsSvg.join("\n"))];
  // compact color scale
  for (let i = 0; i <= 40; i++) {
    const v = -1 + i / 20;
    parts.push(`<rect x="${fmt(WIDTH - 22)}" y="${fmt(PLOT_Y[0] - (i + 1) * ((PLOT_Y[0] - PLOT_Y[1]) / 41))}" ` +
      `width="10" height="${fmt((PLOT_Y[0] - PLOT_Y[1]) / 41 + 0.5)}" fill="${divergingColor(v)}"/>`);
  }
  parts.push(axes(sx, sy, spec.xlabel ?? "t", spec.ylabel ?? pName,
    spec.title ?? "polarization surface"));
  return svgDoc(parts.join("\n"));
}

const WITNESS = [
  { col: "abs_tpp", label: "|T++|", color: "#c23b22" },
  { col: "abs_tpm", label: "|T+-|", color: "#2a8a43" },
  { col: "abs_tmp", label: "|T-+|", color: "#2a8a43" },
  { col: "abs_tmm", label: "|T--|", color: "#1f4e9c" },
];

/** Witness magnitudes; the optional second CSV is drawn dotted. */
export function renderMqsPanel(tables: Table[], spec: FigureSpec): string {
  const main = tables[0];
  requireColumns(main, ["t", ...WITNESS.map((w) => w.col)]);
  const tMain = column(main, "t");
  const sx = linearScale(extent(tMain), PLOT_X);
  const sy = linearScale([0, 0.5], PLOT_Y);
  const curves: string[] = [];
  const labels: string[] = [];
  WITNESS.forEach((w, i) => {
    curves.push(polyline(tMain, column(main, w.col), sx, sy, w.color));
    labels.push(text(WIDTH - MARGIN.right - 8, MARGIN.top + 18 + 16 * i,
      w.label, "end", 12, ` fill="${w.color}"`));
  });
  if (tables.length > 1) {
    const ref = tables[1];
    requireColumns(ref, ["t", ...WITNESS.map((w) => w.col)]);
    const tRef = column(ref, "t");
    for (const w of WITNESS) {
      curves.push(polyline(tRef, column(ref, w.col), sx, sy, w.color, "5,4"));
    }
    labels.push(text(WIDTH - MARGIN.right - 8, MARGIN.top + 18 + 16 * WITNESS.length,
      "dotted: no-system reference", "end", 11, ' fill="#444"'));
  }
  const parts = [clipped(curves.join("\n")), ...labels];
  parts.push(axes(sx, sy, spec.xlabel ?? "t", spec.ylabel ?? "|Theta|",
    spec.title ?? "superposition witness"));
  return svgDoc(parts.join("\n"));
}

export function render(spec: FigureSpec, tables: Table[]): string {
  const names = spec.inputs.map((p) => basename(p).replace(/\.csv$/, ""));
  switch (spec.kind) {
    case "steady_curve":
      return renderSteadyCurve(tables, names, spec);
    case "surface":
      if (tables.length !== 1) {
        throw new SchemaError("surface takes exactly one input CSV");
      }
      return renderSurface(tables[0], spec);
    case "mqs_panel":
      return renderMqsPanel(tables, spec);
  }
}
