/** Figure specification loading and validation. */

import { readFileSync } from "node:fs";
import { dirname, isAbsolute, join } from "node:path";

import { FigureSpec } from "./figures.js";

const KINDS = new Set(["steady_curve", "surface", "mqs_panel"]);

export class SpecError extends Error {}

export function loadSpec(path: string): FigureSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new SpecError(`cannot read spec ${path}: ${(err as Error).message}`);
  }
  const obj = raw as Record<string, unknown>;
  if (typeof obj.kind !== "string" || !KINDS.has(obj.kind)) {
    throw new SpecError(`spec.kind must be one of ${[...KINDS].join(", ")}`);
  }
  if (!Array.isArray(obj.inputs) || obj.inputs.length === 0
      || obj.inputs.some((p) => typeof p !== "string")) {
    throw new SpecError("spec.inputs must be a nonempty list of CSV paths");
  }
  if (typeof obj.output !== "string" || obj.output.length === 0) {
    throw new SpecError("spec.output must be the image path to write");
  }
  const base = dirname(path);
  const resolve = (p: string) => (isAbsolute(p) ? p : join(base, p));
  return {
    kind: obj.kind as FigureSpec["kind"],
    inputs: (obj.inputs as string[]).map(resolve),
    output: resolve(obj.output as string),
    xlabel: typeof obj.xlabel === "string" ? obj.xlabel : undefined,
    ylabel: typeof obj.ylabel === "string" ? obj.ylabel : undefined,
    title: typeof obj.title === "string" ? obj.title : undefined,
  };
}
