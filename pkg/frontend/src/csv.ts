/** Minimal CSV reading with column-schema enforcement. */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {}

export interface Table {
  columns: string[];
  rows: number[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new SchemaError("CSV has no data rows");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(",").map(Number));
  for (const row of rows) {
    if (row.length !== columns.length || row.some((v) => Number.isNaN(v))) {
      throw new SchemaError("CSV row does not match the header");
    }
  }
  return { columns, rows };
}

export function readTable(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"));
}

/** Column by name; a missing column is a schema error naming it. */
export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`missing column '${name}'`);
  }
  return table.rows.map((r) => r[idx]);
}

export function requireColumns(table: Table, names: string[]): void {
  for (const name of names) {
    if (!table.columns.includes(name)) {
      throw new SchemaError(`missing column '${name}'`);
    }
  }
}
